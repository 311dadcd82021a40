#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "aoi/core.hpp"

namespace aoi {

namespace detail {

// (-1)^(n-1) times the divided difference of x -> exp(-a x) over the nodes.
// Positive for a > 0; the density of a sum of independent Exp(x_i) stages is
// prod(x_i) times this value.
//
// Well-separated nodes use the two-point recurrence with the extreme nodes.
// When a * spread <= 1 the recurrence would cancel, so the value is taken
// from the Taylor expansion about the midpoint:
//   e^{-a c} * sum_k (-1)^k a^{k+n-1} / (k+n-1)! * h_k(x - c)
// with h_k the complete homogeneous symmetric polynomial. Confluent nodes
// (e.g. lambda == mu) fall into this branch and give the Erlang limit.
inline double exp_divdiff(std::span<const double> sorted_nodes, double a) {
    const std::size_t n = sorted_nodes.size();
    if (n == 1) return std::exp(-a * sorted_nodes[0]);
    const double lo = sorted_nodes.front();
    const double hi = sorted_nodes.back();
    const double spread = hi - lo;
    if (a * spread > 1.0) {
        const double without_hi = exp_divdiff(sorted_nodes.first(n - 1), a);
        const double without_lo = exp_divdiff(sorted_nodes.subspan(1), a);
        return (without_hi - without_lo) / spread;
    }

    const double c = 0.5 * (lo + hi);
    constexpr std::size_t kMaxNodes = 8;
    std::array<double, kMaxNodes> y{};
    for (std::size_t i = 0; i < n; ++i) y[i] = sorted_nodes[i] - c;

    // h[j] holds h_k(y_1..y_j) for the current k; h_0 = 1.
    std::array<double, kMaxNodes> h;
    h.fill(1.0);

    // a^{n-1} / (n-1)!
    double coef = 1.0;
    for (std::size_t j = 1; j < n; ++j) coef *= a / static_cast<double>(j);

    // a * |y_i| <= 1/2, so the terms fall off faster than 2^-k / k!.
    double sum = coef;  // k = 0 term
    for (int k = 1; k < 28; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            acc = acc + y[j] * h[j];  // h_k(y_1..y_j) = h_k(y_1..y_{j-1}) + y_j h_{k-1}(y_1..y_j)
            h[j] = acc;
        }
        coef *= -a / static_cast<double>(k + static_cast<int>(n) - 1);
        const double term = coef * h[n - 1];
        sum += term;
    }
    return std::exp(-a * c) * sum;
}

}  // namespace detail

/// Sum of independent exponential stages with the given rates.
class Hypoexponential {
public:
    Hypoexponential(std::initializer_list<double> rates) : Hypoexponential(std::vector<double>(rates)) {}

    explicit Hypoexponential(std::vector<double> rates) : rates_(std::move(rates)) {
        if (rates_.empty() || rates_.size() > 8) {
            throw Error(ErrorKind::InvalidArgument, "hypoexponential needs 1..8 stages");
        }
        for (double r : rates_) {
            if (!(std::isfinite(r) && r > 0.0)) {
                throw Error(ErrorKind::InvalidArgument, "stage rates must be positive");
            }
        }
    }

    const std::vector<double>& rates() const noexcept { return rates_; }

    double pdf(double a) const {
        if (a < 0.0) return 0.0;
        double prod = 1.0;
        for (double r : rates_) prod *= r;
        return prod * divdiff_prefix(rates_.size(), a);
    }

    /// P(X > a) as the sum over stages of P(process is in stage i at time a),
    /// each a nonnegative term.
    double ccdf(double a) const {
        if (a <= 0.0) return 1.0;
        double total = 0.0;
        double prod = 1.0;
        for (std::size_t i = 0; i < rates_.size(); ++i) {
            total += prod * divdiff_prefix(i + 1, a);
            prod *= rates_[i];
        }
        return std::min(total, 1.0);
    }

    double cdf(double a) const { return 1.0 - ccdf(a); }

    double mean() const {
        double m = 0.0;
        for (double r : rates_) m += 1.0 / r;
        return m;
    }

    double second_moment() const {
        double var = 0.0;
        for (double r : rates_) var += 1.0 / (r * r);
        const double m = mean();
        return var + m * m;
    }

private:
    double divdiff_prefix(std::size_t count, double a) const {
        std::array<double, 8> nodes{};
        std::copy_n(rates_.begin(), count, nodes.begin());
        std::sort(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(count));
        return detail::exp_divdiff(std::span<const double>(nodes.data(), count), a);
    }

    std::vector<double> rates_;
};

/// Finite mixture of hypoexponential laws. Weights must sum to one.
class HypoMixture {
public:
    HypoMixture() = default;
    HypoMixture(std::initializer_list<std::pair<double, Hypoexponential>> parts) : parts_(parts) {}

    void add(double weight, Hypoexponential h) {
        if (weight > 0.0) parts_.emplace_back(weight, std::move(h));
    }
    void add(double weight, const HypoMixture& m) {
        for (const auto& [w, h] : m.parts_) add(weight * w, h);
    }

    double pdf(double a) const {
        double s = 0.0;
        for (const auto& [w, h] : parts_) s += w * h.pdf(a);
        return s;
    }
    double ccdf(double a) const {
        if (a <= 0.0) return 1.0;
        double s = 0.0;
        for (const auto& [w, h] : parts_) s += w * h.ccdf(a);
        return std::min(s, 1.0);
    }
    double mean() const {
        double s = 0.0;
        for (const auto& [w, h] : parts_) s += w * h.mean();
        return s;
    }
    double second_moment() const {
        double s = 0.0;
        for (const auto& [w, h] : parts_) s += w * h.second_moment();
        return s;
    }
    const std::vector<std::pair<double, Hypoexponential>>& parts() const noexcept { return parts_; }

private:
    std::vector<std::pair<double, Hypoexponential>> parts_;
};

}  // namespace aoi
