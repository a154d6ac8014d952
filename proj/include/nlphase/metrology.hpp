// metrology.hpp
// Nonlinear phase estimation: the generalized phase shift
// U(phi, k) = exp(i phi n_2^k), pure-state quantum Fisher information and
// the phase sensitivity delta_phi = 1/sqrt(F), plus the series evaluation
// of the ECS Fisher information and amplitude matching helpers.

#pragma once

#include "states.hpp"

namespace nlphase {

/// Generalized (nonlinear for k >= 2) phase shift acting on mode 2.
struct PhaseShift {
    double phi;
    int k;

    PhaseShift(double phi_, int k_) : phi(phi_), k(k_) {
        if (k_ < 1) throw std::domain_error("PhaseShift: order k must be >= 1");
    }
};

/// exp(i phi n_2^k)|psi>; diagonal in the Fock basis, so the coefficient
/// matrix picks up a column-dependent phase. The output keeps the raw
/// coefficients (no re-fixing of the global phase) so that derivatives in
/// phi are meaningful.
inline TwoModeState apply_phase(const TwoModeState& s, const PhaseShift& p) {
    Mat c = s.coeffs();
    for (int m2 = 0; m2 < s.dim(); ++m2) {
        const double angle = p.phi * std::pow(static_cast<double>(m2), p.k);
        const complexd ph(std::cos(angle), std::sin(angle));
        c.col(m2) *= ph;
    }
    return TwoModeState::raw(std::move(c), s.truncation());
}

/// Estimation diagnostics attached to every Fisher-information value.
struct QfiReport {
    double qfi = 0.0;
    double delta_phi = 0.0;
    int series_terms_used = 0;              // 0 when evaluated in the Fock basis
    double truncation_error_estimate = 0.0;  // tail bound of the series, if any

    static QfiReport from_qfi(double f, int terms = 0, double tail = 0.0) {
        QfiReport r;
        r.qfi = f;
        r.delta_phi = f > 0.0 ? 1.0 / std::sqrt(f) : std::numeric_limits<double>::infinity();
        r.series_terms_used = terms;
        r.truncation_error_estimate = tail;
        return r;
    }
};

/// Pure-state QFI for the generator n_2^k:
/// F = 4 (<n_2^{2k}> - <n_2^k>^2).
inline QfiReport pure_qfi(const TwoModeState& s, int k) {
    if (k < 1) throw std::domain_error("pure_qfi: order k must be >= 1");
    const double mk = number_moment(s, 2, k);
    const double m2k = number_moment(s, 2, 2 * k);
    return QfiReport::from_qfi(4.0 * (m2k - mk * mk));
}

/// NOON-state sensitivity in closed form: F = N^{2k}, delta_phi = N^{-k}.
inline QfiReport noon_sensitivity(int N, int k) {
    if (N < 1) throw std::domain_error("noon_sensitivity: N must be >= 1");
    if (k < 1) throw std::domain_error("noon_sensitivity: k must be >= 1");
    return QfiReport::from_qfi(std::pow(static_cast<double>(N), 2.0 * k));
}

namespace detail {

/// S_p(alpha^2) = sum_n n^p alpha^{2n}/n!, evaluated by the iterative
/// term recurrence b_n = b_{n-1} alpha^2 / n. Returns the sum and a
/// ratio-test tail bound; used for the ECS QFI and moment series.
struct SeriesResult {
    double value = 0.0;
    int terms = 0;
    double tail_bound = 0.0;
};

inline SeriesResult ecs_series(double alpha2, int p, double rel_eps) {
    KahanSum sum;
    double b = 1.0;  // alpha^{2n}/n! at n = 0
    int n = 0;
    constexpr int kMaxTerms = 10000;
    for (; n < kMaxTerms; ++n) {
        sum.add(std::pow(static_cast<double>(n), p) * b);
        const double ratio = alpha2 / (n + 1.0);
        // once the term ratio stays below 1/2 the geometric tail bound applies
        if (n > alpha2 && ratio < 0.5) {
            const double next = std::pow(n + 1.0, p) * b * ratio;
            const double tail = 2.0 * next;
            if (tail <= rel_eps * std::max(sum.value(), 1e-300)) {
                SeriesResult r;
                r.value = sum.value();
                r.terms = n + 1;
                r.tail_bound = tail;
                return r;
            }
        }
        b *= ratio;
    }
    throw truncation_error("ecs_series: no convergence within term budget");
}

}  // namespace detail

/// Mean photon number per arm of ECS_pm in closed form:
/// <n> = N_pm^2 alpha^2, N_pm^2 = 1/(2(1 pm e^{-alpha^2})).
inline double ecs_mean_photon(double alpha, Parity parity) {
    if (!(alpha > 0)) throw std::domain_error("ecs_mean_photon: alpha must be > 0");
    const double sign = parity == Parity::Even ? 1.0 : -1.0;
    const double n2 = 1.0 / (2.0 * (1.0 + sign * std::exp(-alpha * alpha)));
    return n2 * alpha * alpha;
}

/// ECS QFI for generator n_2^k, summed analytically over the Poisson
/// series: with f = e^{-alpha^2} N_pm^2 and S_p = sum n^p alpha^{2n}/n!,
///   F = 4 f (S_{2k} - f S_k^2).
inline QfiReport ecs_qfi_series(double alpha, Parity parity, int k, double rel_eps = 1e-14) {
    if (!(alpha > 0)) throw std::domain_error("ecs_qfi_series: alpha must be > 0");
    if (k < 1) throw std::domain_error("ecs_qfi_series: k must be >= 1");
    const double a2 = alpha * alpha;
    const double sign = parity == Parity::Even ? 1.0 : -1.0;
    const double f = std::exp(-a2) / (2.0 * (1.0 + sign * std::exp(-a2)));
    const auto sk = detail::ecs_series(a2, k, rel_eps);
    const auto s2k = detail::ecs_series(a2, 2 * k, rel_eps);
    const double qfi = 4.0 * f * (s2k.value - f * sk.value * sk.value);
    return QfiReport::from_qfi(qfi, std::max(sk.terms, s2k.terms),
                               4.0 * f * (s2k.tail_bound + 2.0 * f * sk.value * sk.tail_bound));
}

/// Solves <n>_ECS(alpha) = nbar for alpha by bisection. The mean photon
/// number is strictly increasing in alpha for both parities; the odd ECS
/// has infimum 1/2 as alpha -> 0, so targets at or below 1/2 are rejected.
inline double match_alpha(double nbar, Parity parity) {
    if (!(nbar > 0)) throw std::domain_error("match_alpha: nbar must be > 0");
    if (parity == Parity::Odd && nbar <= 0.5)
        throw std::domain_error("match_alpha: odd ECS mean photon number exceeds 1/2; target " +
                                std::to_string(nbar) + " is infeasible");
    double lo = 1e-8, hi = 1.0;
    while (ecs_mean_photon(hi, parity) < nbar) {
        hi *= 2.0;
        if (hi > 1e6) throw std::domain_error("match_alpha: target out of range");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ecs_mean_photon(mid, parity) < nbar)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Solves <n_2>_AECS(alpha0) = nbar for alpha0. The per-arm mean
/// (alpha0^2 coth alpha0^2 + alpha0^2)/2 is strictly increasing with
/// infimum 1/2 as alpha0 -> 0.
inline double match_aecs_alpha0(double nbar) {
    if (!(nbar > 0.5))
        throw std::domain_error("match_aecs_alpha0: AECS mean photon number exceeds 1/2; target " +
                                std::to_string(nbar) + " is infeasible");
    double lo = 1e-8, hi = 1.0;
    while (aecs_mean_photon(hi) < nbar) {
        hi *= 2.0;
        if (hi > 1e6) throw std::domain_error("match_aecs_alpha0: target out of range");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (aecs_mean_photon(mid) < nbar)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// <n_2^k> of an antisymmetric state from its triangle coefficients:
/// sum_{m > m'} H^2 (m^k + m'^k). (Each unordered pair contributes both
/// orientations with weight H^2.)
inline double aecs_moment(const std::vector<HCoefficient>& h, int k) {
    if (k < 0) throw std::domain_error("aecs_moment: k must be >= 0");
    detail::KahanSum s;
    for (const auto& c : h)
        s.add(c.value * c.value *
              (std::pow(static_cast<double>(c.m), k) + std::pow(static_cast<double>(c.mprime), k)));
    return s.value();
}

}  // namespace nlphase
