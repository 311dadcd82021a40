#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aoi {

enum class ErrorKind {
    InvalidArgument,
    InsufficientPath,
    UnstableQueue,
    UnsupportedModel,
    ZeroHorizon,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Poisson arrival rate and exponential service rate, per unit time.
class RateParams {
public:
    RateParams(double lambda, double mu) : lambda_(lambda), mu_(mu) {
        if (!(std::isfinite(lambda) && lambda > 0.0) || !(std::isfinite(mu) && mu > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "rates must be finite and positive");
        }
    }

    double lambda() const noexcept { return lambda_; }
    double mu() const noexcept { return mu_; }
    double rho() const noexcept { return lambda_ / mu_; }

private:
    double lambda_;
    double mu_;
};

/// Queueing discipline of the status-update source.
///   MM1      - FCFS, unbounded buffer, no packet management
///   MM11     - no buffer; arrivals that find the server busy are blocked
///   MM12     - one waiting slot; arrivals that find the system full are blocked
///   MM12Star - one waiting slot; a new arrival replaces the waiting packet
enum class QueueModel { MM1, MM11, MM12, MM12Star };

inline constexpr QueueModel kManagedModels[] = {QueueModel::MM11, QueueModel::MM12,
                                                QueueModel::MM12Star};

/// Total system capacity (in service + waiting); nullopt means unbounded.
constexpr std::optional<int> capacity(QueueModel m) {
    switch (m) {
        case QueueModel::MM1: return std::nullopt;
        case QueueModel::MM11: return 1;
        case QueueModel::MM12:
        case QueueModel::MM12Star: return 2;
    }
    return std::nullopt;
}

constexpr std::string_view model_name(QueueModel m) {
    switch (m) {
        case QueueModel::MM1: return "mm1";
        case QueueModel::MM11: return "mm11";
        case QueueModel::MM12: return "mm12";
        case QueueModel::MM12Star: return "mm12star";
    }
    return "?";
}

inline std::optional<QueueModel> parse_model(std::string_view s) {
    if (s == "mm1") return QueueModel::MM1;
    if (s == "mm11") return QueueModel::MM11;
    if (s == "mm12") return QueueModel::MM12;
    if (s == "mm12star" || s == "mm12*") return QueueModel::MM12Star;
    return std::nullopt;
}

/// One successfully transmitted packet.
struct DeliveryRecord {
    double gen_time;
    double depart_time;

    double sojourn() const noexcept { return depart_time - gen_time; }
};

/// Exact description of the sawtooth age process on [start_time, horizon].
///
/// The age at start_time is initial_age; it then grows at slope one and drops
/// to depart_time - gen_time at each delivery. start_time is zero unless the
/// path was cut out of a longer run (burn-in, splitting).
struct AgeSamplePath {
    double initial_age = 0.0;
    std::vector<DeliveryRecord> deliveries;
    double horizon = 0.0;
    double start_time = 0.0;

    double duration() const noexcept { return horizon - start_time; }
};

/// Throws if the path breaks an AgeSamplePath invariant. When a model is
/// given, the no-buffer constraint of MM11 is checked as well.
inline void validate_path(const AgeSamplePath& path, std::optional<QueueModel> model = {}) {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); };
    if (!(path.initial_age >= 0.0)) fail("initial age must be nonnegative");
    if (!(path.horizon > path.start_time)) fail("horizon must exceed start time");
    double prev_depart = path.start_time;
    for (std::size_t k = 0; k < path.deliveries.size(); ++k) {
        const auto& d = path.deliveries[k];
        if (!(d.gen_time >= 0.0)) fail("generation time must be nonnegative");
        if (!(d.depart_time > d.gen_time)) fail("departure must follow generation");
        if (k > 0 && !(d.depart_time > prev_depart)) fail("departures must strictly increase");
        if (k == 0 && d.depart_time < path.start_time) fail("departure before path start");
        if (d.depart_time > path.horizon) fail("departure after horizon");
        if (k > 0 && model == QueueModel::MM11 && d.gen_time < prev_depart) {
            fail("mm11 packet generated before the previous departure");
        }
        prev_depart = d.depart_time;
    }
}

/// Per-delivery quantities for k >= 2 (index 0 of the result is k = 2).
struct PacketQuantities {
    double sojourn;        // T_k
    double interdeparture; // Y_k
    double peak;           // A_k = T_{k-1} + Y_k
    double area;           // Q_k = (T_{k-1} + Y_k)^2 / 2 - T_k^2 / 2
};

inline std::vector<PacketQuantities> derive_per_packet(const AgeSamplePath& path) {
    const auto& d = path.deliveries;
    if (d.size() < 2) {
        throw Error(ErrorKind::InsufficientPath, "insufficient path: need at least 2 deliveries");
    }
    std::vector<PacketQuantities> out;
    out.reserve(d.size() - 1);
    for (std::size_t k = 1; k < d.size(); ++k) {
        const double t_prev = d[k - 1].sojourn();
        const double t_k = d[k].sojourn();
        const double y = d[k].depart_time - d[k - 1].depart_time;
        const double peak = t_prev + y;
        out.push_back({t_k, y, peak, 0.5 * peak * peak - 0.5 * t_k * t_k});
    }
    return out;
}

struct Estimate {
    double value = std::numeric_limits<double>::quiet_NaN();
    double stderr_ = std::numeric_limits<double>::quiet_NaN();
};

/// Result statistics of one simulation run. Counts cover the whole run;
/// estimates cover the observation window after burn-in.
struct SimSummary {
    Estimate time_avg_age;
    Estimate mean_peak_age;
    double effective_rate = 0.0;
    std::vector<double> occupancy_fractions;
    std::vector<double> occupancy_stderr;
    Estimate mean_occupancy;

    std::uint64_t arrivals = 0;
    std::uint64_t delivered_count = 0;
    std::uint64_t dropped_count = 0;  // replaced while waiting (MM12Star)
    std::uint64_t blocked_count = 0;  // refused on arrival (MM11, MM12)
    std::uint64_t in_system_at_end = 0;

    std::vector<double> peak_samples;

    // Window statistics used by the Little's-law and departure-state checks.
    std::uint64_t window_arrivals = 0;
    std::uint64_t window_departures = 0;
    std::uint64_t departures_leaving_empty = 0;
    Estimate mean_sojourn_delivered;
    double mean_sojourn_admitted = 0.0;  // delivered and replaced packets
    double window = 0.0;

    std::vector<std::string> warnings;
};

}  // namespace aoi
