#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "aoi/core.hpp"

namespace aoi::metrics {

/// Area under the sawtooth split into the head polygon Q_1, the sum of the
/// trapezoids Q_k (k >= 2) and the trailing part Q~.
///
/// Q_k is the big triangle over [t_{k-1}, t'_k] minus the small one over
/// [t_k, t'_k]. Q_1 is the area over [start, t'_1] less the small triangle of
/// packet 1, which Q_2 already covers; Q~ is the area over [t'_N, horizon]
/// plus the small triangle of packet N, which no Q_k subtracts.
struct AreaDecomposition {
    double head = 0.0;
    double body = 0.0;
    double tail = 0.0;
    bool no_deliveries = false;

    double total() const noexcept { return head + body + tail; }
};

inline AreaDecomposition area_decomposition(const AgeSamplePath& path) {
    AreaDecomposition out;
    const double s0 = path.start_time;
    const auto& d = path.deliveries;
    if (d.empty()) {
        const double len = path.duration();
        out.head = path.initial_age * len + 0.5 * len * len;
        out.no_deliveries = true;
        return out;
    }
    const double first_len = d.front().depart_time - s0;
    const double t_first = d.front().sojourn();
    out.head = path.initial_age * first_len + 0.5 * first_len * first_len - 0.5 * t_first * t_first;

    for (std::size_t k = 1; k < d.size(); ++k) {
        const double peak = d[k - 1].sojourn() + (d[k].depart_time - d[k - 1].depart_time);
        const double t_k = d[k].sojourn();
        out.body += 0.5 * peak * peak - 0.5 * t_k * t_k;
    }

    const double t_last = d.back().sojourn();
    const double rest = path.horizon - d.back().depart_time;
    out.tail = t_last * rest + 0.5 * rest * rest + 0.5 * t_last * t_last;
    return out;
}

/// Exact time-average age over the observation window. A path without
/// deliveries grows linearly: the result is initial_age + duration / 2.
inline double time_average_age(const AgeSamplePath& path) {
    if (!(path.duration() > 0.0)) throw Error(ErrorKind::ZeroHorizon, "path horizon must be positive");
    return area_decomposition(path).total() / path.duration();
}

/// Age at time t (right-continuous: at a delivery instant it is already reset).
inline double age_at(const AgeSamplePath& path, double t) {
    const auto& d = path.deliveries;
    auto it = std::upper_bound(d.begin(), d.end(), t,
                               [](double x, const DeliveryRecord& r) { return x < r.depart_time; });
    if (it == d.begin()) return path.initial_age + (t - path.start_time);
    return t - std::prev(it)->gen_time;
}

/// Cuts the path at s into [start, s] and [s, horizon], carrying the age over.
inline std::pair<AgeSamplePath, AgeSamplePath> split_path(const AgeSamplePath& path, double s) {
    if (!(s > path.start_time && s < path.horizon)) {
        throw Error(ErrorKind::InvalidArgument, "split point must lie strictly inside the path");
    }
    AgeSamplePath left{path.initial_age, {}, s, path.start_time};
    AgeSamplePath right{age_at(path, s), {}, path.horizon, s};
    for (const auto& rec : path.deliveries) {
        (rec.depart_time <= s ? left : right).deliveries.push_back(rec);
    }
    return {std::move(left), std::move(right)};
}

/// Peak ages A_k = T_{k-1} + Y_k for k >= 2. The first delivery's peak
/// depends on the initial age and is left out.
inline std::vector<double> extract_peaks(const AgeSamplePath& path) {
    const auto& d = path.deliveries;
    if (d.size() < 2) throw Error(ErrorKind::InsufficientPath, "insufficient path: need at least 2 deliveries");
    std::vector<double> peaks;
    peaks.reserve(d.size() - 1);
    for (std::size_t k = 1; k < d.size(); ++k) {
        peaks.push_back(d[k - 1].sojourn() + (d[k].depart_time - d[k - 1].depart_time));
    }
    return peaks;
}

/// Fraction of samples strictly greater than each grid point.
inline std::vector<double> empirical_ccdf(std::span<const double> samples, std::span<const double> grid) {
    if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "empirical ccdf needs samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::vector<double> out;
    out.reserve(grid.size());
    for (double a : grid) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), a);
        out.push_back(static_cast<double>(above) / n);
    }
    return out;
}

/// Kolmogorov-Smirnov distance sup |F_n - F| between the samples and the
/// continuous law whose complementary CDF is given.
template <class Ccdf>
double ks_distance(std::span<const double> samples, Ccdf&& ccdf) {
    if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "ks distance needs samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = 1.0 - ccdf(sorted[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, hi - f, f - lo});
    }
    return std::clamp(d, 0.0, 1.0);
}

namespace detail {
inline Estimate mean_and_stderr(const std::vector<double>& batch_values) {
    const std::size_t b = batch_values.size();
    Estimate e;
    if (b == 0) return e;
    double sum = 0.0;
    for (double v : batch_values) sum += v;
    const double mean = sum / static_cast<double>(b);
    if (b < 2) return {mean, e.stderr_};
    double ss = 0.0;
    for (double v : batch_values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b))};
}
}  // namespace detail

/// Batch-means estimate: the series is cut into contiguous batches and the
/// standard error comes from the spread of the batch averages. The point
/// value is the plain sample mean.
inline Estimate batch_means(std::span<const double> x, std::size_t batches = 32) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    batches = std::clamp<std::size_t>(batches, 1, n);
    std::vector<double> means;
    means.reserve(batches);
    double total = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = b * n / batches;
        const std::size_t hi = (b + 1) * n / batches;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += x[i];
        total += s;
        means.push_back(s / static_cast<double>(hi - lo));
    }
    Estimate e = detail::mean_and_stderr(means);
    e.value = total / static_cast<double>(n);
    return e;
}

/// Batch means for a ratio sum(num) / sum(den), e.g. area over elapsed time.
inline Estimate ratio_batch_means(std::span<const double> num, std::span<const double> den,
                                  std::size_t batches = 32) {
    const std::size_t n = std::min(num.size(), den.size());
    if (n == 0) return {};
    batches = std::clamp<std::size_t>(batches, 1, n);
    std::vector<double> ratios;
    ratios.reserve(batches);
    double tn = 0.0, td = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = b * n / batches;
        const std::size_t hi = (b + 1) * n / batches;
        double sn = 0.0, sd = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            sn += num[i];
            sd += den[i];
        }
        tn += sn;
        td += sd;
        ratios.push_back(sn / sd);
    }
    Estimate e = detail::mean_and_stderr(ratios);
    e.value = tn / td;
    return e;
}

/// Exact time-average age with a batch-means standard error. Batches are
/// formed from the per-interval areas T_{k-1} Y_k + Y_k^2 / 2 over
/// [t'_{k-1}, t'_k], which tile the path between the first and last delivery.
inline Estimate time_average_age_estimate(const AgeSamplePath& path, std::size_t batches = 32) {
    Estimate e{time_average_age(path), std::numeric_limits<double>::quiet_NaN()};
    const auto& d = path.deliveries;
    if (d.size() < 3) return e;
    std::vector<double> areas, spans;
    areas.reserve(d.size() - 1);
    spans.reserve(d.size() - 1);
    for (std::size_t k = 1; k < d.size(); ++k) {
        const double y = d[k].depart_time - d[k - 1].depart_time;
        areas.push_back(d[k - 1].sojourn() * y + 0.5 * y * y);
        spans.push_back(y);
    }
    e.stderr_ = ratio_batch_means(areas, spans, batches).stderr_;
    return e;
}

}  // namespace aoi::metrics
