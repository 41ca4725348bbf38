#include "qbm/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

#include "qbm/errors.hpp"

namespace qbm::quad {
namespace {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
constexpr std::array<double, 11> kNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208226385935, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gauss_kronrod(const Integrand& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kKronrodWeights[10];
    double gauss = 0.0;
    std::array<double, 10> f1{}, f2{};
    for (int j = 0; j < 10; ++j) {
        const double dx = half * kNodes[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        kronrod += kKronrodWeights[j] * (f1[j] + f2[j]);
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f1[j] + f2[j]);
    }
    const double mean = 0.5 * kronrod;
    double asc = kKronrodWeights[10] * std::abs(fc - mean);
    for (int j = 0; j < 10; ++j)
        asc += kKronrodWeights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    asc *= std::abs(half);
    double err = std::abs((kronrod - gauss) * half);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    return {a, b, kronrod * half, err};
}

}  // namespace

Result integrate(const Integrand& f, double a, double b, const Options& opts) {
    const std::array<double, 2> bp{a, b};
    return integrate(f, bp, opts);
}

Result integrate(const Integrand& f, std::span<const double> breakpoints, const Options& opts) {
    Result out;
    if (breakpoints.size() < 2) return out;
    std::priority_queue<Segment> heap;
    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (breakpoints[i + 1] == breakpoints[i]) continue;
        Segment s = gauss_kronrod(f, breakpoints[i], breakpoints[i + 1]);
        total += s.value;
        total_err += s.error;
        heap.push(s);
    }
    int count = static_cast<int>(heap.size());
    auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };
    while (!heap.empty() && total_err > target()) {
        if (count >= opts.max_intervals) break;
        Segment worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        // Interval can no longer be split in floating point.
        if (mid <= worst.a || mid >= worst.b) break;
        heap.pop();
        Segment left = gauss_kronrod(f, worst.a, mid);
        Segment right = gauss_kronrod(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++count;
    }
    // Re-sum to avoid drift from the incremental updates.
    total = 0.0;
    total_err = 0.0;
    std::vector<Segment> segs;
    segs.reserve(heap.size());
    while (!heap.empty()) {
        segs.push_back(heap.top());
        heap.pop();
    }
    std::sort(segs.begin(), segs.end(), [](const Segment& l, const Segment& r) { return l.a < r.a; });
    for (const auto& s : segs) {
        total += s.value;
        total_err += s.error;
    }
    out.value = total;
    out.error = total_err;
    out.intervals = count;
    out.converged = total_err <= target();
    if (!out.converged && opts.throw_on_failure)
        throw QuadratureError("adaptive quadrature did not converge", total_err, target());
    return out;
}

std::vector<double> oscillation_panels(double a, double b, double freq, int min_panels, double per_period) {
    const double period = freq > 0.0 ? 2.0 * std::numbers::pi / freq : 0.0;
    long n = min_panels;
    if (period > 0.0) n = std::max<long>(n, static_cast<long>(std::ceil((b - a) / period * per_period)));
    std::vector<double> bp(static_cast<std::size_t>(n) + 1);
    for (long i = 0; i <= n; ++i) bp[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
    bp.back() = b;
    return bp;
}

}  // namespace qbm::quad
