#pragma once

#include <charconv>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <ostream>
#include <string_view>
#include <variant>
#include <vector>

#include "aoi/core.hpp"
#include "aoi/metrics.hpp"
#include "aoi/rng.hpp"

namespace aoi {

struct StopByDepartures {
    std::uint64_t departures;
};
struct StopByHorizon {
    double horizon;
};

struct SimConfig {
    QueueModel model;
    RateParams rates;
    std::variant<StopByDepartures, StopByHorizon> stop;
    std::uint64_t seed = 0;
    double initial_age = 0.0;
    std::uint64_t burn_in_departures = 0;
    std::size_t batches = 32;
    bool record_trace = false;

    void validate() const {
        auto fail = [](const char* msg) { throw Error(ErrorKind::InvalidArgument, msg); };
        if (!(initial_age >= 0.0) || !std::isfinite(initial_age)) fail("initial age must be nonnegative");
        if (batches < 2) fail("need at least 2 batches");
        if (const auto* d = std::get_if<StopByDepartures>(&stop)) {
            if (d->departures == 0) fail("departures must be positive");
            if (burn_in_departures >= d->departures) fail("burn-in must be below the departure count");
        } else {
            const double h = std::get<StopByHorizon>(stop).horizon;
            if (!(h > 0.0) || !std::isfinite(h)) fail("horizon must be positive");
        }
    }
};

enum class TraceKind { Arrival, ServiceStart, Departure, Blocked, Replaced };

constexpr std::string_view trace_kind_name(TraceKind k) {
    switch (k) {
        case TraceKind::Arrival: return "arrival";
        case TraceKind::ServiceStart: return "service_start";
        case TraceKind::Departure: return "departure";
        case TraceKind::Blocked: return "blocked";
        case TraceKind::Replaced: return "replaced";
    }
    return "?";
}

struct TraceEvent {
    double time;
    TraceKind kind;
    std::uint64_t packet_id;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct SimTrace {
    std::vector<TraceEvent> events;
};

/// Writes `time<TAB>kind<TAB>packet_id` lines, times with 17 significant digits.
inline void write_trace(std::ostream& os, const SimTrace& trace) {
    char buf[64];
    for (const auto& e : trace.events) {
        auto res = std::to_chars(buf, buf + sizeof buf, e.time, std::chars_format::general, 17);
        os.write(buf, res.ptr - buf);
        os << '\t' << trace_kind_name(e.kind) << '\t' << e.packet_id << '\n';
    }
}

/// Time-weighted occupancy accounting, split into consecutive batches so the
/// fractions come with batch-means standard errors.
class OccupancyAccumulator {
public:
    explicit OccupancyAccumulator(double start_time = 0.0, std::size_t level = 0)
        : last_(start_time), level_(level) {
        batches_.emplace_back();
    }

    /// Credits the current level with the time since the previous call.
    void advance(double t) {
        const double dt = t - last_;
        if (dt > 0.0) {
            auto& b = batches_.back();
            if (b.size() <= level_) b.resize(level_ + 1, 0.0);
            b[level_] += dt;
        }
        last_ = t;
    }

    void set_level(std::size_t level) { level_ = level; }
    std::size_t level() const noexcept { return level_; }

    /// Restarts accounting at t, dropping everything recorded so far.
    void reset(double t) {
        batches_.assign(1, {});
        last_ = t;
    }

    void begin_batch() { batches_.emplace_back(); }

    /// Whole-run fractions, one entry per level up to the highest visited
    /// (at least min_levels entries).
    std::vector<double> fractions(std::size_t min_levels = 1) const {
        std::vector<double> total(min_levels, 0.0);
        for (const auto& b : batches_) {
            if (b.size() > total.size()) total.resize(b.size(), 0.0);
            for (std::size_t j = 0; j < b.size(); ++j) total[j] += b[j];
        }
        double sum = 0.0;
        for (double v : total) sum += v;
        if (!(sum > 0.0)) throw Error(ErrorKind::ZeroHorizon, "zero effective horizon for occupancy");
        for (double& v : total) v /= sum;
        return total;
    }

    /// Per-batch fractions for batches with positive duration.
    std::vector<std::vector<double>> batch_fractions(std::size_t levels) const {
        std::vector<std::vector<double>> out;
        for (const auto& b : batches_) {
            double sum = 0.0;
            for (double v : b) sum += v;
            if (!(sum > 0.0)) continue;
            std::vector<double> f(levels, 0.0);
            for (std::size_t j = 0; j < b.size() && j < levels; ++j) f[j] = b[j] / sum;
            out.push_back(std::move(f));
        }
        return out;
    }

private:
    double last_;
    std::size_t level_;
    std::vector<std::vector<double>> batches_;
};

struct SimResult {
    AgeSamplePath path;
    SimSummary summary;
    std::optional<SimTrace> trace;
};

namespace detail {

struct Packet {
    std::uint64_t id;
    double gen_time;
};

class Simulation {
public:
    explicit Simulation(const SimConfig& cfg)
        : cfg_(cfg),
          arrivals_rng_(cfg.seed, StreamId::Arrivals),
          service_rng_(cfg.seed, StreamId::Service),
          cap_(capacity(cfg.model)) {
        if (cfg.record_trace) trace_.emplace();
    }

    SimResult run() {
        const double lambda = cfg_.rates.lambda();
        const double inf = std::numeric_limits<double>::infinity();
        const auto* by_dep = std::get_if<StopByDepartures>(&cfg_.stop);
        const double horizon = by_dep ? inf : std::get<StopByHorizon>(cfg_.stop).horizon;
        const std::uint64_t target = by_dep ? by_dep->departures : 0;

        if (cfg_.model == QueueModel::MM1 && !(lambda < cfg_.rates.mu())) {
            summary_.warnings.emplace_back("unstable queue: mm1 with lambda >= mu grows without bound");
        }

        if (cfg_.burn_in_departures == 0) open_window(0.0, cfg_.initial_age);
        double next_arrival = arrivals_rng_.exponential(lambda);
        double now = 0.0;

        while (true) {
            const double next_departure = in_service_ ? service_end_ : inf;
            // Departure first on ties: an arrival at the same instant sees a free server.
            const bool is_departure = next_departure <= next_arrival;
            const double t = is_departure ? next_departure : next_arrival;
            if (t > horizon) break;
            cross_time_boundaries(t);
            if (window_open_) occupancy_.advance(t);
            now = t;
            if (is_departure) {
                on_departure(t);
                if (by_dep && summary_.delivered_count == target) break;
            } else {
                on_arrival(t);
                next_arrival = t + arrivals_rng_.exponential(lambda);
            }
        }

        if (!window_open_) throw Error(ErrorKind::ZeroHorizon, "burn-in did not complete before the horizon");
        const double end = by_dep ? now : horizon;
        if (!by_dep) {
            cross_time_boundaries(end);
            occupancy_.advance(end);
        }
        return finish(end);
    }

private:
    std::size_t in_system() const { return (in_service_ ? 1u : 0u) + buffer_.size(); }

    void log(double t, TraceKind kind, std::uint64_t id) {
        if (trace_) trace_->events.push_back({t, kind, id});
    }

    void open_window(double t, double initial_age) {
        window_open_ = true;
        path_.start_time = t;
        path_.initial_age = initial_age;
        occupancy_.reset(t);
        occupancy_.set_level(in_system());
        if (const auto* h = std::get_if<StopByHorizon>(&cfg_.stop)) {
            batch_width_ = (h->horizon - t) / static_cast<double>(cfg_.batches);
            next_time_boundary_ = t + batch_width_;
            boundaries_left_ = cfg_.batches - 1;
        } else {
            const auto n = std::get<StopByDepartures>(cfg_.stop).departures - cfg_.burn_in_departures;
            departure_batches_ = std::min<std::uint64_t>(cfg_.batches, n);
            departures_per_batch_base_ = summary_.delivered_count;
            departures_in_window_target_ = n;
            next_departure_batch_ = 1;
        }
    }

    void cross_time_boundaries(double t) {
        if (!window_open_ || boundaries_left_ == 0) return;
        while (boundaries_left_ > 0 && next_time_boundary_ <= t) {
            occupancy_.advance(next_time_boundary_);
            occupancy_.begin_batch();
            --boundaries_left_;
            next_time_boundary_ += batch_width_;
        }
    }

    void start_service(double t, Packet p) {
        in_service_ = p;
        service_end_ = t + service_rng_.exponential(cfg_.rates.mu());
        log(t, TraceKind::ServiceStart, p.id);
    }

    void on_arrival(double t) {
        const Packet p{next_id_++, t};
        ++summary_.arrivals;
        if (window_open_) ++summary_.window_arrivals;
        log(t, TraceKind::Arrival, p.id);
        if (!in_service_) {
            start_service(t, p);
        } else if (!cap_ || in_system() < static_cast<std::size_t>(*cap_)) {
            buffer_.push_back(p);
        } else if (cfg_.model == QueueModel::MM12Star) {
            const Packet old = buffer_.front();
            buffer_.front() = p;
            ++summary_.dropped_count;
            log(t, TraceKind::Replaced, old.id);
            if (window_open_) {
                admitted_sojourn_sum_ += t - old.gen_time;
                ++admitted_exits_;
            }
        } else {
            ++summary_.blocked_count;
            log(t, TraceKind::Blocked, p.id);
        }
        if (window_open_) occupancy_.set_level(in_system());
    }

    void on_departure(double t) {
        const Packet done = *in_service_;
        in_service_.reset();
        ++summary_.delivered_count;
        log(t, TraceKind::Departure, done.id);
        if (!buffer_.empty()) {
            const Packet next = buffer_.front();
            buffer_.pop_front();
            start_service(t, next);
        }

        if (!window_open_) {
            if (summary_.delivered_count == cfg_.burn_in_departures) open_window(t, t - done.gen_time);
            return;
        }
        path_.deliveries.push_back({done.gen_time, t});
        ++summary_.window_departures;
        if (in_system() == 0) ++summary_.departures_leaving_empty;
        admitted_sojourn_sum_ += t - done.gen_time;
        ++admitted_exits_;
        occupancy_.set_level(in_system());

        if (departure_batches_ > 1 && next_departure_batch_ < departure_batches_) {
            const std::uint64_t done_in_window = summary_.delivered_count - departures_per_batch_base_;
            if (done_in_window == next_departure_batch_ * departures_in_window_target_ / departure_batches_) {
                occupancy_.begin_batch();
                ++next_departure_batch_;
            }
        }
    }

    SimResult finish(double end) {
        path_.horizon = end;
        auto& s = summary_;
        s.in_system_at_end = in_system();
        s.window = end - path_.start_time;
        if (!(s.window > 0.0)) throw Error(ErrorKind::ZeroHorizon, "zero effective horizon");

        const std::size_t min_levels = cap_ ? static_cast<std::size_t>(*cap_) + 1 : 1;
        s.occupancy_fractions = occupancy_.fractions(min_levels);
        const std::size_t levels = s.occupancy_fractions.size();
        const auto per_batch = occupancy_.batch_fractions(levels);
        s.occupancy_stderr.assign(levels, std::numeric_limits<double>::quiet_NaN());
        std::vector<double> column(per_batch.size());
        for (std::size_t j = 0; j < levels; ++j) {
            for (std::size_t b = 0; b < per_batch.size(); ++b) column[b] = per_batch[b][j];
            s.occupancy_stderr[j] = metrics::detail::mean_and_stderr(column).stderr_;
        }
        std::vector<double> batch_mean_occ(per_batch.size(), 0.0);
        for (std::size_t b = 0; b < per_batch.size(); ++b) {
            for (std::size_t j = 0; j < levels; ++j) batch_mean_occ[b] += static_cast<double>(j) * per_batch[b][j];
        }
        double occ = 0.0;
        for (std::size_t j = 0; j < levels; ++j) occ += static_cast<double>(j) * s.occupancy_fractions[j];
        s.mean_occupancy = {occ, metrics::detail::mean_and_stderr(batch_mean_occ).stderr_};

        s.effective_rate = static_cast<double>(path_.deliveries.size()) / s.window;
        s.time_avg_age = metrics::time_average_age_estimate(path_, cfg_.batches);
        if (path_.deliveries.size() >= 2) {
            s.peak_samples = metrics::extract_peaks(path_);
            s.mean_peak_age = metrics::batch_means(s.peak_samples, cfg_.batches);
        }
        if (!path_.deliveries.empty()) {
            std::vector<double> sojourns;
            sojourns.reserve(path_.deliveries.size());
            for (const auto& d : path_.deliveries) sojourns.push_back(d.sojourn());
            s.mean_sojourn_delivered = metrics::batch_means(sojourns, cfg_.batches);
        }
        s.mean_sojourn_admitted =
            admitted_exits_ ? admitted_sojourn_sum_ / static_cast<double>(admitted_exits_) : 0.0;
        return SimResult{std::move(path_), std::move(summary_), std::move(trace_)};
    }

    const SimConfig& cfg_;
    RandomStream arrivals_rng_;
    RandomStream service_rng_;
    std::optional<int> cap_;

    std::optional<Packet> in_service_;
    double service_end_ = 0.0;
    std::deque<Packet> buffer_;
    std::uint64_t next_id_ = 1;

    bool window_open_ = false;
    AgeSamplePath path_;
    SimSummary summary_;
    OccupancyAccumulator occupancy_;
    std::optional<SimTrace> trace_;
    double admitted_sojourn_sum_ = 0.0;
    std::uint64_t admitted_exits_ = 0;

    // Batch boundaries: by time for horizon runs, by departures otherwise.
    double batch_width_ = 0.0;
    double next_time_boundary_ = 0.0;
    std::size_t boundaries_left_ = 0;
    std::uint64_t departure_batches_ = 0;
    std::uint64_t departures_per_batch_base_ = 0;
    std::uint64_t departures_in_window_target_ = 0;
    std::uint64_t next_departure_batch_ = 0;
};

}  // namespace detail

/// Runs one seeded packet-level simulation. Same config, same bits out.
///
/// MM12Star replaces only the waiting packet; the packet in service is never
/// preempted.
inline SimResult simulate(const SimConfig& cfg) {
    cfg.validate();
    return detail::Simulation(cfg).run();
}

}  // namespace aoi
