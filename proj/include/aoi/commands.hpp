#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "aoi/analytic.hpp"
#include "aoi/metrics.hpp"
#include "aoi/rng.hpp"
#include "aoi/simulator.hpp"

// Command implementations behind the `aoi` executable. Everything writes to
// caller-provided streams so the commands can be tested in-process.
namespace aoi::cli {

enum ExitCode : int { kSuccess = 0, kValidationFailure = 1, kUsageError = 2 };

inline constexpr std::uint64_t kDefaultBaseSeed = 0xA0E01234ULL;

/// AOI_SEED (decimal or 0x-prefixed hex) if set and well formed, else the default.
inline std::uint64_t base_seed_from_env() {
    const char* s = std::getenv("AOI_SEED");
    if (!s || !*s) return kDefaultBaseSeed;
    std::string_view v(s);
    int base = 10;
    if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
        v.remove_prefix(2);
        base = 16;
    }
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
    if (ec != std::errc{} || p != v.data() + v.size()) return kDefaultBaseSeed;
    return out;
}

/// Shortest-form number with 12 significant digits, locale independent.
inline std::string fmt(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

inline std::string fmt(std::uint64_t v) { return std::to_string(v); }

/// Comma-separated line writer.
class CsvRow {
public:
    explicit CsvRow(std::ostream& os) : os_(os) {}
    ~CsvRow() { os_ << '\n'; }
    CsvRow(const CsvRow&) = delete;
    CsvRow& operator=(const CsvRow&) = delete;

    template <class T>
    CsvRow& operator<<(const T& v) {
        if (!first_) os_ << ',';
        first_ = false;
        if constexpr (std::is_floating_point_v<T>) {
            os_ << fmt(static_cast<double>(v));
        } else {
            os_ << v;
        }
        return *this;
    }

private:
    std::ostream& os_;
    bool first_ = true;
};

// ---------------------------------------------------------------------------
// analytic

inline constexpr std::string_view kMetrics[] = {"avg-age",      "avg-peak",     "peak-ccdf",     "peak-pdf",
                                                "steady-state", "sojourn-mean", "effective-rate"};

inline bool is_metric(std::string_view m) {
    for (auto k : kMetrics)
        if (k == m) return true;
    return false;
}

inline std::vector<double> default_a_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 20; ++i) g.push_back(0.5 * i);
    return g;
}

struct AnalyticRequest {
    QueueModel model;
    double lambda;
    double mu;
    std::string metric;
    std::vector<double> a_grid;
};

/// Rows `model,lambda,mu,metric,arg,value`. Throws aoi::Error for
/// unsupported (model, metric) pairs and invalid rates.
inline void run_analytic(const AnalyticRequest& req, std::ostream& out) {
    const RateParams r(req.lambda, req.mu);
    const auto m = req.model;
    std::ostringstream body;
    auto row = [&](std::string_view arg, double value) {
        CsvRow(body) << model_name(m) << req.lambda << req.mu << req.metric << arg << value;
    };
    if (req.metric == "avg-age") {
        row("", analytic::avg_age(m, r));
    } else if (req.metric == "avg-peak") {
        row("", analytic::avg_peak_age(m, r));
    } else if (req.metric == "peak-ccdf" || req.metric == "peak-pdf") {
        const auto law = analytic::peak_law(m, r);
        for (double a : req.a_grid) {
            if (!(a >= 0.0)) throw Error(ErrorKind::InvalidArgument, "peak age argument must be nonnegative");
            row(fmt(a), req.metric == "peak-ccdf" ? law.ccdf(a) : law.pdf(a));
        }
    } else if (req.metric == "steady-state") {
        const auto p = analytic::steady_state(m, r);
        for (std::size_t j = 0; j < p.size(); ++j) row(std::to_string(j), p[j]);
    } else if (req.metric == "sojourn-mean") {
        const auto s = analytic::sojourn_law(m, r);
        row("t", s.mean_t);
        row("w", s.mean_w);
        row("t_given_psi", s.mean_t_given_psi);
        row("t_given_psi_bar", s.mean_t_given_psi_bar);
        if (s.all_packets) row("t_all_packets", s.all_packets_mean());
    } else if (req.metric == "effective-rate") {
        row("", analytic::effective_rate(m, r));
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown metric: " + req.metric);
    }
    out << "model,lambda,mu,metric,arg,value\n" << body.str();
}

// ---------------------------------------------------------------------------
// simulate

/// Rows `metric,value,stderr` describing one run.
inline void write_summary(const SimConfig& cfg, const SimSummary& s, std::ostream& out) {
    out << "metric,value,stderr\n";
    auto est = [&](std::string_view name, const Estimate& e) { CsvRow(out) << name << e.value << e.stderr_; };
    auto val = [&](std::string_view name, double v) { CsvRow(out) << name << v << ""; };
    auto cnt = [&](std::string_view name, std::uint64_t v) { CsvRow(out) << name << fmt(v) << ""; };
    val("lambda", cfg.rates.lambda());
    val("mu", cfg.rates.mu());
    est("time_avg_age", s.time_avg_age);
    est("mean_peak_age", s.mean_peak_age);
    val("effective_rate", s.effective_rate);
    for (std::size_t j = 0; j < s.occupancy_fractions.size(); ++j) {
        est("occupancy_" + std::to_string(j), {s.occupancy_fractions[j], s.occupancy_stderr[j]});
    }
    est("mean_occupancy", s.mean_occupancy);
    est("mean_sojourn_delivered", s.mean_sojourn_delivered);
    val("mean_sojourn_admitted", s.mean_sojourn_admitted);
    val("window", s.window);
    cnt("arrivals", s.arrivals);
    cnt("delivered", s.delivered_count);
    cnt("dropped", s.dropped_count);
    cnt("blocked", s.blocked_count);
    cnt("in_system_at_end", s.in_system_at_end);
    cnt("window_departures", s.window_departures);
    cnt("departures_leaving_empty", s.departures_leaving_empty);
}

// ---------------------------------------------------------------------------
// figure

inline constexpr std::string_view kFigures[] = {"avg-vs-lambda", "compare-mm1", "avg-vs-mu", "peak-ccdf",
                                                "peak-vs-lambda"};

inline bool is_figure(std::string_view id) {
    for (auto f : kFigures)
        if (f == id) return true;
    return false;
}

/// Arrival-rate sweep at mu = 1: lambda = 0.05, 0.10, ..., 1.50.
inline std::vector<double> lambda_sweep() {
    std::vector<double> g;
    for (int i = 1; i <= 30; ++i) g.push_back(i / 20.0);
    return g;
}

/// Service-rate sweep at lambda = 0.5, ending with large rates for the limit.
inline std::vector<double> mu_sweep() {
    std::vector<double> g;
    for (int i = 1; i <= 50; ++i) g.push_back(i / 10.0);
    for (double v : {10.0, 100.0, 1e3, 1e6}) g.push_back(v);
    return g;
}

inline std::vector<double> ccdf_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 60; ++i) g.push_back(0.25 * i);
    return g;
}

struct FigureOptions {
    bool with_sim = false;
    std::uint64_t base_seed = kDefaultBaseSeed;
    std::uint64_t sim_departures = 100000;
};

namespace detail {

struct FigureWriter {
    std::ostream& out;
    const FigureOptions& opt;
    std::uint64_t point = 0;

    void header() { out << (opt.with_sim ? "series,x,y,sim_y,sim_stderr\n" : "series,x,y\n"); }

    SimConfig sim_config(QueueModel m, double l, double mu) {
        return SimConfig{m, RateParams(l, mu), StopByDepartures{opt.sim_departures}, derive_seed(opt.base_seed, point)};
    }

    enum class Stat { Age, Peak };

    void point_row(std::string_view series, QueueModel m, double l, double mu, double x, double y, Stat stat) {
        if (opt.with_sim) {
            const auto s = simulate(sim_config(m, l, mu)).summary;
            const Estimate e = stat == Stat::Age ? s.time_avg_age : s.mean_peak_age;
            CsvRow(out) << series << x << y << e.value << e.stderr_;
        } else {
            CsvRow(out) << series << x << y;
        }
        ++point;
    }
};

}  // namespace detail

inline void run_figure(std::string_view id, const FigureOptions& opt, std::ostream& out) {
    if (!is_figure(id)) throw Error(ErrorKind::InvalidArgument, "unknown figure id: " + std::string(id));
    detail::FigureWriter w{out, opt};
    using Stat = detail::FigureWriter::Stat;
    w.header();
    if (id == "avg-vs-lambda" || id == "peak-vs-lambda") {
        const bool peak = id == "peak-vs-lambda";
        for (auto m : kManagedModels) {
            for (double l : lambda_sweep()) {
                const RateParams r(l, 1.0);
                const double y = peak ? analytic::avg_peak_age(m, r) : analytic::avg_age(m, r);
                w.point_row(model_name(m), m, l, 1.0, l, y, peak ? Stat::Peak : Stat::Age);
            }
        }
    } else if (id == "compare-mm1") {
        for (auto m : {QueueModel::MM1, QueueModel::MM12Star}) {
            for (double l : lambda_sweep()) {
                if (m == QueueModel::MM1 && !(l < 1.0)) continue;  // diverges at lambda >= mu
                w.point_row(model_name(m), m, l, 1.0, l, analytic::avg_age(m, {l, 1.0}), Stat::Age);
            }
        }
    } else if (id == "avg-vs-mu") {
        for (auto m : kManagedModels) {
            for (double mu : mu_sweep()) {
                w.point_row(model_name(m), m, 0.5, mu, mu, analytic::avg_age(m, {0.5, mu}), Stat::Age);
            }
        }
    } else {  // peak-ccdf
        const auto grid = ccdf_grid();
        for (double l : {0.5, 1.3}) {
            for (auto m : kManagedModels) {
                const RateParams r(l, 1.0);
                const std::string series = std::string(model_name(m)) + "_lambda" + fmt(l);
                const auto law = analytic::peak_law(m, r);
                std::vector<double> peaks;
                if (opt.with_sim) peaks = simulate(w.sim_config(m, l, 1.0)).summary.peak_samples;
                ++w.point;
                for (double a : grid) {
                    if (opt.with_sim) {
                        std::vector<double> above(peaks.size());
                        for (std::size_t i = 0; i < peaks.size(); ++i) above[i] = peaks[i] > a ? 1.0 : 0.0;
                        const auto e = metrics::batch_means(above);
                        CsvRow(out) << series << a << law.ccdf(a) << e.value << e.stderr_;
                    } else {
                        CsvRow(out) << series << a << law.ccdf(a);
                    }
                }
            }
        }
    }
}

}  // namespace aoi::cli
