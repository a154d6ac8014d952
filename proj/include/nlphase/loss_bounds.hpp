// loss_bounds.hpp
// Upper bounds on the quantum Fisher information of a probe whose sensing
// arm passes through a transmission-T loss channel. The bounds depend on
// the probe only through low-order photon-number moments of the sensing
// mode, so they are cheap to evaluate from closed forms.

#pragma once

#include "metrology.hpp"

namespace nlphase {

/// Photon-number moments <n>, <n^2>, <n^3>, <n^4> of the sensing mode.
struct MomentSet {
    double m1;
    double m2;
    double m3;
    double m4;

    MomentSet(double m1_, double m2_, double m3_, double m4_)
        : m1(m1_), m2(m2_), m3(m3_), m4(m4_) {
        if (m1 < 0) throw std::domain_error("MomentSet: <n> must be >= 0");
        if (m2 < m1 * m1 - 1e-9)
            throw std::domain_error("MomentSet: <n^2> < <n>^2 violates Jensen");
        if (m4 < m2 * m2 - 1e-9)
            throw std::domain_error("MomentSet: <n^4> < <n^2>^2 violates Jensen");
    }
};

struct LossModel {
    double transmission;

    explicit LossModel(double T) : transmission(T) {
        if (!(T >= 0.0 && T <= 1.0))
            throw std::domain_error("LossModel: transmission must lie in [0,1]");
    }
};

inline MomentSet moments_of(const TwoModeState& s) {
    return MomentSet(number_moment(s, 2, 1), number_moment(s, 2, 2), number_moment(s, 2, 3),
                     number_moment(s, 2, 4));
}

/// Moments of the sensing mode in closed form where available, falling
/// back to the Fock-basis expansion otherwise.
inline MomentSet moments_of(const StateSpec& spec) {
    spec.validate();
    switch (spec.family) {
        case StateFamily::Noon: {
            // mode 2 holds |0> or |N> with probability 1/2 each
            const double N = spec.n;
            const double N2 = N * N;
            return MomentSet(N / 2.0, N2 / 2.0, N2 * N / 2.0, N2 * N2 / 2.0);
        }
        case StateFamily::EcsPlus:
        case StateFamily::EcsMinus: {
            // the sensing arm of N_pm(|alpha,0> pm |0,alpha>) carries
            // <n^p> = f S_p with f = e^{-a^2} N_pm^2
            const double a2 = spec.alpha * spec.alpha;
            const double sign = spec.family == StateFamily::EcsPlus ? 1.0 : -1.0;
            const double f = std::exp(-a2) / (2.0 * (1.0 + sign * std::exp(-a2)));
            const auto s1 = detail::ecs_series(a2, 1, 1e-14);
            const auto s2 = detail::ecs_series(a2, 2, 1e-14);
            const auto s3 = detail::ecs_series(a2, 3, 1e-14);
            const auto s4 = detail::ecs_series(a2, 4, 1e-14);
            return MomentSet(f * s1.value, f * s2.value, f * s3.value, f * s4.value);
        }
        default: {
            const Truncation t = adapt_probe(spec);
            const TwoModeState s = make_probe(spec, t);
            return moments_of(s);
        }
    }
}

/// Linear-phase (k = 1) loss bound:
/// C_1 = 4 [T^2 (<n^2> - <n>^2) + T(1-T) <n>].
inline double cq1(const MomentSet& m, const LossModel& loss) {
    const double T = loss.transmission;
    return 4.0 * (T * T * (m.m2 - m.m1 * m.m1) + T * (1.0 - T) * m.m1);
}

/// Kerr-phase (k = 2) loss bound, from the binomial-thinning moments of
/// the surviving photon number:
///   C_2 = 4 [ T^4 <n^4> + 6T^3(1-T) <n^3> + T^2(1-T)(7-11T) <n^2>
///             + T(1-T)(1-6T+6T^2) <n>
///             - ( T^4 <n^2>^2 + 2T^3(1-T) <n><n^2> + T^2(1-T)^2 <n>^2 ) ].
/// At T = 1 this reduces to the pure-state QFI 4 Var(n^2); the T-linear
/// and T-cubic cross terms come from E[X^4], E[X^2] with
/// X ~ Binomial(n, T).
inline double cq2(const MomentSet& m, const LossModel& loss) {
    const double T = loss.transmission;
    const double R = 1.0 - T;
    const double T2 = T * T;
    const double T3 = T2 * T;
    const double T4 = T3 * T;
    const double h1 = T4 * m.m4 + 6.0 * T3 * R * m.m3 + T2 * R * (7.0 - 11.0 * T) * m.m2 +
                      T * R * (1.0 - 6.0 * T + 6.0 * T2) * m.m1;
    const double h2sq = T4 * m.m2 * m.m2 + 2.0 * T3 * R * m.m1 * m.m2 + T2 * R * R * m.m1 * m.m1;
    return 4.0 * (h1 - h2sq);
}

/// Bound on the QFI of the lossy channel for phase order k; the resulting
/// delta_phi lower bound is 1/sqrt(C_k). T = 0 destroys all phase
/// information: the bound is 0 and delta_phi diverges.
struct LossySensitivity {
    double cq;
    double delta_phi_bound;
};

inline LossySensitivity lossy_sensitivity(const MomentSet& m, const LossModel& loss, int k) {
    double c;
    switch (k) {
        case 1:
            c = cq1(m, loss);
            break;
        case 2:
            c = cq2(m, loss);
            break;
        default:
            throw std::domain_error("lossy_sensitivity: bounds implemented for k = 1, 2 only");
    }
    LossySensitivity out;
    out.cq = std::max(c, 0.0);
    out.delta_phi_bound =
        out.cq > 0.0 ? 1.0 / std::sqrt(out.cq) : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace nlphase
