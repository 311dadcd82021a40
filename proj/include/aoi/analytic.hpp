#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "aoi/core.hpp"
#include "aoi/hypoexponential.hpp"

// Closed-form age-of-information results for status-update queues with
// Poisson arrivals and exponential service.
//
// Notation in comments: l = lambda, m = mu, n = l + m, rho = l / m.
// psi is the event that a departing packet leaves the system empty.
namespace aoi::analytic {

namespace detail {

inline void require_managed(QueueModel model) {
    if (model == QueueModel::MM1) {
        throw Error(ErrorKind::UnsupportedModel,
                    "unsupported model: mm1 has no closed form for this quantity");
    }
}

inline void require_stable(QueueModel model, const RateParams& r) {
    if (model == QueueModel::MM1 && !(r.lambda() < r.mu())) {
        throw Error(ErrorKind::UnstableQueue, "unstable queue: mm1 requires lambda < mu");
    }
}

}  // namespace detail

/// Stationary occupancy distribution. MM1 is geometric and truncated once the
/// remaining tail mass drops below 1e-13.
inline std::vector<double> steady_state(QueueModel model, const RateParams& r) {
    detail::require_stable(model, r);
    const double l = r.lambda();
    const double m = r.mu();
    const double rho = r.rho();
    switch (model) {
        case QueueModel::MM11:
            return {m / (l + m), l / (l + m)};
        case QueueModel::MM12:
        case QueueModel::MM12Star: {
            // Same birth-death chain: replacement keeps the occupancy at 2.
            const double z = 1.0 + rho + rho * rho;
            return {1.0 / z, rho / z, rho * rho / z};
        }
        case QueueModel::MM1: {
            std::vector<double> p;
            double pj = 1.0 - rho;
            double tail = 1.0;
            while (tail > 1e-13) {
                p.push_back(pj);
                tail -= pj;
                pj *= rho;
                if (pj == 0.0) break;
            }
            return p;
        }
    }
    return {};
}

/// Long-run rate of delivered packets.
inline double effective_rate(QueueModel model, const RateParams& r) {
    detail::require_stable(model, r);
    if (model == QueueModel::MM1) return r.lambda();
    const auto p = steady_state(model, r);
    return r.lambda() * (1.0 - p.back());
}

struct EventPsiSplit {
    double p_psi;
    double p_psi_bar;
};

/// Departure-epoch probability of leaving an empty system, normalised from
/// the stationary probabilities of the states a departure can leave behind.
inline EventPsiSplit psi_split(QueueModel model, const RateParams& r) {
    detail::require_managed(model);
    if (model == QueueModel::MM11) return {1.0, 0.0};
    const auto p = steady_state(model, r);
    const double p_psi = p[0] / (p[0] + p[1]);
    return {p_psi, 1.0 - p_psi};
}

struct ConditionalMoments {
    double mean_y_given_psi;
    double mean_y2_given_psi;
    double mean_y_given_psi_bar;
    double mean_y2_given_psi_bar;
    double mean_t_given_psi;
    double mean_t_given_psi_bar;
};

/// Interdeparture law conditioned on psi (idle period then a service) and on
/// psi-bar (a service only).
struct InterdepartureLaw {
    double mean_y_given_psi;
    double mean_y2_given_psi;
    double mean_y_given_psi_bar;
    double mean_y2_given_psi_bar;
    Hypoexponential given_psi;
    Hypoexponential given_psi_bar;

    double pdf_given_psi(double y) const { return given_psi.pdf(y); }
    double pdf_given_psi_bar(double y) const { return given_psi_bar.pdf(y); }
    double ccdf_given_psi(double y) const { return given_psi.ccdf(y); }
    double ccdf_given_psi_bar(double y) const { return given_psi_bar.ccdf(y); }
};

inline InterdepartureLaw interdeparture_conditional(const RateParams& r) {
    const double l = r.lambda();
    const double m = r.mu();
    return InterdepartureLaw{
        1.0 / l + 1.0 / m,
        2.0 * (l * l + l * m + m * m) / (l * l * m * m),
        1.0 / m,
        2.0 / (m * m),
        Hypoexponential{l, m},
        Hypoexponential{m},
    };
}

/// Conditional first moments of the sojourn T_{k-1} given psi / psi-bar,
/// built from T = W + S: the waiting time does not depend on arrivals during
/// the packet's own service, while the service time does.
///
/// For MM11 psi is certain; the psi-bar sojourn is reported as 1/mu and never
/// carries weight.
inline ConditionalMoments conditional_moments(QueueModel model, const RateParams& r) {
    detail::require_managed(model);
    const double l = r.lambda();
    const double m = r.mu();
    const double n = l + m;
    const auto y = interdeparture_conditional(r);
    ConditionalMoments c{y.mean_y_given_psi, y.mean_y2_given_psi, y.mean_y_given_psi_bar,
                         y.mean_y2_given_psi_bar, 0.0, 0.0};
    const double service_given_psi = 1.0 / n;            // no arrival during service
    const double service_given_psi_bar = 1.0 / m + 1.0 / n;  // at least one arrival
    switch (model) {
        case QueueModel::MM11:
            c.mean_t_given_psi = 1.0 / m;
            c.mean_t_given_psi_bar = 1.0 / m;
            break;
        case QueueModel::MM12: {
            const double wait = l / (m * n);
            c.mean_t_given_psi = wait + service_given_psi;
            c.mean_t_given_psi_bar = wait + service_given_psi_bar;
            break;
        }
        case QueueModel::MM12Star: {
            const double wait = l / (n * n);
            c.mean_t_given_psi = wait + service_given_psi;
            c.mean_t_given_psi_bar = wait + service_given_psi_bar;
            break;
        }
        case QueueModel::MM1: break;
    }
    return c;
}

/// E[T_{k-1} Y_k], closed forms.
inline double product_moment_ty(QueueModel model, const RateParams& r) {
    detail::require_managed(model);
    const double l = r.lambda();
    const double m = r.mu();
    const double n = l + m;
    switch (model) {
        case QueueModel::MM11: return (1.0 / m) * (1.0 / l + 1.0 / m);
        case QueueModel::MM12: return (2.0 * l * l + l * m + m * m) / (l * m * m * n);
        case QueueModel::MM12Star: return 1.0 / (m * m) + 1.0 / (l * m) - (2.0 * l + m) / (n * n * n);
        case QueueModel::MM1: break;
    }
    return 0.0;
}

/// E[T_{k-1} Y_k] by conditioning on psi, under which T_{k-1} and Y_k are
/// independent.
inline double product_moment_ty_nested(QueueModel model, const RateParams& r) {
    const auto s = psi_split(model, r);
    const auto c = conditional_moments(model, r);
    return s.p_psi * c.mean_t_given_psi * c.mean_y_given_psi +
           s.p_psi_bar * c.mean_t_given_psi_bar * c.mean_y_given_psi_bar;
}

/// 0.5 E[Y^2] from the psi mixture of the conditional second moments.
inline double half_mean_y2(QueueModel model, const RateParams& r) {
    const auto s = psi_split(model, r);
    const auto c = conditional_moments(model, r);
    return 0.5 * (s.p_psi * c.mean_y2_given_psi + s.p_psi_bar * c.mean_y2_given_psi_bar);
}

/// Time-average age, closed forms.
inline double avg_age(QueueModel model, const RateParams& r) {
    detail::require_stable(model, r);
    const double l = r.lambda();
    const double m = r.mu();
    const double n = l + m;
    const double q = l * l + l * m + m * m;
    switch (model) {
        // (1/m)(1 + 1/rho + rho^2 / (1 - rho)); reduces to 1/l + 1 + l^2/(1 - l) at m = 1.
        case QueueModel::MM1: return 1.0 / l + 1.0 / m + l * l / (m * m * (m - l));
        case QueueModel::MM11: return 1.0 / l + 2.0 / m - 1.0 / n;
        case QueueModel::MM12: return 1.0 / l + 3.0 / m - 2.0 * n / q;
        case QueueModel::MM12Star:
            return 1.0 / l + 2.0 / m + l / (n * n) + 1.0 / n - 2.0 * n / q;
    }
    return 0.0;
}

/// Average age rebuilt as lambda_e * (E[Y^2]/2 + E[T_{k-1} Y_k]).
inline double avg_age_from_parts(QueueModel model, const RateParams& r) {
    return effective_rate(model, r) * (half_mean_y2(model, r) + product_moment_ty_nested(model, r));
}

struct SojournLaw {
    QueueModel model;
    HypoMixture delivered;  // law of T for transmitted packets
    double mean_t;
    double mean_w;
    double mean_t_given_psi;
    double mean_t_given_psi_bar;
    // MM12Star only: law over every admitted packet, delivered or replaced.
    std::optional<HypoMixture> all_packets;
    std::optional<double> p_tx_given_busy;

    double ccdf(double t) const { return delivered.ccdf(t); }
    double all_packets_ccdf(double t) const {
        if (!all_packets) throw Error(ErrorKind::UnsupportedModel, "all-packets law is mm12star only");
        return all_packets->ccdf(t);
    }
    double all_packets_mean() const {
        if (!all_packets) throw Error(ErrorKind::UnsupportedModel, "all-packets law is mm12star only");
        return all_packets->mean();
    }
};

inline SojournLaw sojourn_law(QueueModel model, const RateParams& r) {
    detail::require_managed(model);
    const double l = r.lambda();
    const double m = r.mu();
    const double n = l + m;
    const auto cond = conditional_moments(model, r);
    SojournLaw law{model, {}, 0.0, 0.0, cond.mean_t_given_psi, cond.mean_t_given_psi_bar, {}, {}};
    switch (model) {
        case QueueModel::MM11:
            law.delivered.add(1.0, Hypoexponential{m});
            law.mean_t = 1.0 / m;
            law.mean_w = 0.0;
            break;
        case QueueModel::MM12: {
            // Found idle: service only. Found busy: residual service then service.
            const auto p = steady_state(model, r);
            const double idle = p[0] / (p[0] + p[1]);
            law.delivered.add(idle, Hypoexponential{m});
            law.delivered.add(1.0 - idle, Hypoexponential{m, m});
            law.mean_t = (m + 2.0 * l) / (m * n);
            law.mean_w = l / (m * n);
            break;
        }
        case QueueModel::MM12Star: {
            // A packet that finds the server busy is transmitted iff nothing
            // arrives during the residual service; its wait is then Exp(n).
            const double p0 = steady_state(model, r)[0];
            const double tx_given_busy = m / n;
            const double p_busy_tx = (1.0 - p0) * tx_given_busy;
            const double p_busy_drop = (1.0 - p0) * (l / n);
            const double idle_given_tx = p0 / (p0 + p_busy_tx);
            law.delivered.add(idle_given_tx, Hypoexponential{m});
            law.delivered.add(1.0 - idle_given_tx, Hypoexponential{n, m});
            law.mean_t = 1.0 / m + l / (n * n);
            law.mean_w = l / (n * n);
            HypoMixture all;
            all.add(p0, Hypoexponential{m});
            all.add(p_busy_tx, Hypoexponential{n, m});
            all.add(p_busy_drop, Hypoexponential{n});  // replaced: next arrival before residual ends
            law.all_packets = std::move(all);
            law.p_tx_given_busy = tx_given_busy;
            break;
        }
        case QueueModel::MM1: break;
    }
    return law;
}

/// Peak-age law as the psi mixture of the conditional laws of T_{k-1} + Y_k.
struct PeakAgeLaw {
    EventPsiSplit split;
    HypoMixture given_psi;
    HypoMixture given_psi_bar;

    double pdf_given_psi(double a) const { return given_psi.pdf(a); }
    double pdf_given_psi_bar(double a) const { return given_psi_bar.pdf(a); }
    double pdf(double a) const {
        if (a < 0.0) return 0.0;
        return split.p_psi * given_psi.pdf(a) + split.p_psi_bar * given_psi_bar.pdf(a);
    }
    double ccdf(double a) const {
        if (a <= 0.0) return 1.0;
        return split.p_psi * given_psi.ccdf(a) + split.p_psi_bar * given_psi_bar.ccdf(a);
    }
    double cdf(double a) const { return 1.0 - ccdf(a); }
    double mean() const {
        return split.p_psi * given_psi.mean() + split.p_psi_bar * given_psi_bar.mean();
    }
};

/// The MM12Star conditional laws are the convolutions
///   A | psi     = W + Exp(n) + Exp(l) + Exp(m)
///   A | psi-bar = W + Exp(n) + Exp(m) + Exp(m)
/// with W = 0 w.p. m/n and W ~ Exp(n) otherwise. Integrating them gives
///   P(A > a) = e^{-na} (l^3 - 3m^3 + l m n (1 + (l - m) a)) / (l n (l - m))
///            + e^{-ma} (3m^3 + l n (l - m) + l m a (l^2 + l m - 2m^2)) / (l n (l - m))
///            - e^{-la} (l^2 + l m + m^2) / (n (l - m)).
/// Evaluation goes through Hypoexponential, which stays exact at l == m.
inline PeakAgeLaw peak_law(QueueModel model, const RateParams& r) {
    detail::require_managed(model);
    const double l = r.lambda();
    const double m = r.mu();
    const double n = l + m;
    PeakAgeLaw law{psi_split(model, r), {}, {}};
    switch (model) {
        case QueueModel::MM11:
            law.given_psi.add(1.0, Hypoexponential{m, l, m});
            break;
        case QueueModel::MM12:
            // T | psi ~ Exp(m), T | psi-bar ~ Erlang(2, m).
            law.given_psi.add(1.0, Hypoexponential{m, l, m});
            law.given_psi_bar.add(1.0, Hypoexponential{m, m, m});
            break;
        case QueueModel::MM12Star: {
            const double no_wait = m / n;
            law.given_psi.add(no_wait, Hypoexponential{n, l, m});
            law.given_psi.add(1.0 - no_wait, Hypoexponential{n, n, l, m});
            law.given_psi_bar.add(no_wait, Hypoexponential{n, m, m});
            law.given_psi_bar.add(1.0 - no_wait, Hypoexponential{n, n, m, m});
            break;
        }
        case QueueModel::MM1: break;
    }
    return law;
}

inline double peak_pdf(QueueModel model, const RateParams& r, double a) {
    if (!(a >= 0.0)) throw Error(ErrorKind::InvalidArgument, "peak age argument must be nonnegative");
    return peak_law(model, r).pdf(a);
}

inline double peak_ccdf(QueueModel model, const RateParams& r, double a) {
    if (!(a >= 0.0)) throw Error(ErrorKind::InvalidArgument, "peak age argument must be nonnegative");
    return peak_law(model, r).ccdf(a);
}

/// Mean peak age, closed forms.
inline double avg_peak_age(QueueModel model, const RateParams& r) {
    detail::require_managed(model);
    const double l = r.lambda();
    const double m = r.mu();
    const double n = l + m;
    switch (model) {
        case QueueModel::MM11: return 1.0 / l + 2.0 / m;
        case QueueModel::MM12: return 1.0 / l + 3.0 / m - 2.0 / n;
        case QueueModel::MM12Star: return 1.0 / m + l / (n * n) + 1.0 / l + (1.0 / m) * (l / n);
        case QueueModel::MM1: break;
    }
    return 0.0;
}

/// E[T] + E[Y] from the sojourn law and the psi mixture of interdeparture means.
inline double avg_peak_age_from_parts(QueueModel model, const RateParams& r) {
    const auto s = psi_split(model, r);
    const auto c = conditional_moments(model, r);
    const double mean_y = s.p_psi * c.mean_y_given_psi + s.p_psi_bar * c.mean_y_given_psi_bar;
    return sojourn_law(model, r).mean_t + mean_y;
}

/// Expanded partial-fraction expressions. They carry removable (l - m)
/// singularities and are meant for cross-checks away from l == m.
namespace expanded {

inline double mm11_peak_pdf(double l, double m, double a) {
    const double k = (m / (l - m)) * (m / (l - m));
    return k * (l * std::exp(-l * a) - l * std::exp(-m * a) + l * (l - m) * a * std::exp(-m * a));
}

inline double mm11_peak_ccdf(double l, double m, double a) {
    const double k = (m / (l - m)) * (m / (l - m));
    return k * std::exp(-l * a) + (1.0 - k) * std::exp(-m * a) + l * m / (l - m) * a * std::exp(-m * a);
}

inline double mm12_peak_pdf_psi(double l, double m, double a) { return mm11_peak_pdf(l, m, a); }

inline double mm12_peak_pdf_psi_bar(double, double m, double a) {
    return 0.5 * a * a * m * m * m * std::exp(-m * a);
}

inline double mm12_peak_ccdf(double l, double m, double a) {
    const double d = l - m;
    const double n = l + m;
    return m * m * m / (d * d * n) * std::exp(-l * a) +
           l / (2.0 * d * d * n) * std::exp(-m * a) *
               (m * m * a * a * d * d + 2.0 * l * m * d * a + 2.0 * (l * l - l * m - m * m));
}

inline double mm12star_peak_pdf_psi(double l, double m, double a) {
    const double n = l + m;
    const double d = l - m;
    return (l * n * a - (2.0 * m * m * m - l * l * l - l * l * m) / (m * d)) * std::exp(-n * a) +
           (l * m + 2.0 * m * m) / d * std::exp(-m * a) -
           (l * m * n + l * l * l) / (m * d) * std::exp(-l * a);
}

inline double mm12star_peak_pdf_psi_bar(double l, double m, double a) {
    const double n = l + m;
    const double k = m * m / (l * l);
    return k * std::exp(-n * a) * (3.0 * m + 2.0 * l + l * n * a) -
           k * std::exp(-m * a) * (3.0 * m + 2.0 * l - l * (l + 2.0 * m) * a);
}

namespace det {
inline double mm12star_ccdf(double l, double m, double a, double bracket) {
    const double n = l + m;
    const double d = l - m;
    return std::exp(-n * a) / (l * n * d) * (l * l * l - 3.0 * m * m * m + l * m * n * bracket) +
           std::exp(-m * a) / (l * n * d) *
               (3.0 * m * m * m + l * n * d + l * m * a * (l * l + l * m - 2.0 * m * m)) -
           std::exp(-l * a) / (n * d) * (l * l + l * m + m * m);
}
}  // namespace det

/// MM12Star peak CCDF obtained by integrating the conditional densities.
inline double mm12star_peak_ccdf(double l, double m, double a) {
    return det::mm12star_ccdf(l, m, a, 1.0 + (l - m) * a);
}

/// The same expression with the bracket written as (1 + (l - m)) instead of
/// (1 + (l - m) a). It differs from the true CCDF by m (1 - a) e^{-(l+m) a}
/// and gives P(A > 0) = 1 + m.
inline double mm12star_peak_ccdf_uncorrected(double l, double m, double a) {
    return det::mm12star_ccdf(l, m, a, 1.0 + (l - m));
}

}  // namespace expanded

}  // namespace aoi::analytic
