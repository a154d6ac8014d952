// states.hpp
// Constructors for every probe state used in the sensitivity and loss
// studies: coherent, Fock, squeezed vacuum, cat states (CSS), NOON,
// entangled coherent states (ECS), the photon-subtracted squeezed vacuum
// (ACSS) and the approximate ECS (AECS) built from it on a 50:50 beam
// splitter.

#pragma once

#include <optional>
#include <variant>

#include "fock.hpp"

namespace nlphase {

enum class Parity { Even, Odd };

enum class StateFamily {
    Noon,
    EcsPlus,
    EcsMinus,
    Aecs,
    Coherent,
    CssPlus,
    CssMinus,
    SqueezedVacuum,
    Fock
};

/// Symbolic descriptor of a probe-state family and its parameters.
struct StateSpec {
    StateFamily family;
    int n = 0;         // NOON N / Fock index
    double alpha = 0;  // coherent-type amplitude (alpha, alpha_pm, alpha_0)
    double r = 0;      // squeezing parameter

    static StateSpec noon(int N) { return {StateFamily::Noon, N, 0.0, 0.0}; }
    static StateSpec ecs(double alpha, Parity p) {
        return {p == Parity::Even ? StateFamily::EcsPlus : StateFamily::EcsMinus, 0, alpha, 0.0};
    }
    static StateSpec aecs(double alpha0) { return {StateFamily::Aecs, 0, alpha0, 0.0}; }
    static StateSpec coherent(double alpha) { return {StateFamily::Coherent, 0, alpha, 0.0}; }
    static StateSpec css(double alpha, Parity p) {
        return {p == Parity::Even ? StateFamily::CssPlus : StateFamily::CssMinus, 0, alpha, 0.0};
    }
    static StateSpec squeezed_vacuum(double r) {
        return {StateFamily::SqueezedVacuum, 0, 0.0, r};
    }
    static StateSpec fock(int n) { return {StateFamily::Fock, n, 0.0, 0.0}; }

    void validate() const {
        switch (family) {
            case StateFamily::Noon:
                if (n < 1) throw std::domain_error("StateSpec: NOON requires N >= 1");
                break;
            case StateFamily::EcsPlus:
            case StateFamily::EcsMinus:
                if (!(alpha > 0)) throw std::domain_error("StateSpec: ECS requires alpha > 0");
                break;
            case StateFamily::Aecs:
                if (!(alpha > 0)) throw std::domain_error("StateSpec: AECS requires alpha0 > 0");
                break;
            case StateFamily::CssMinus:
                if (!(alpha > 0)) throw std::domain_error("StateSpec: odd CSS requires alpha > 0");
                break;
            case StateFamily::SqueezedVacuum:
                if (r < 0) throw std::domain_error("StateSpec: squeezing r must be >= 0");
                break;
            case StateFamily::Fock:
                if (n < 0) throw std::domain_error("StateSpec: Fock index must be >= 0");
                break;
            default:
                break;
        }
    }
};

/// Diagnostics of a (possibly conditional) state-preparation pipeline.
struct PreparationReport {
    std::variant<SingleModeState, TwoModeState> state;
    double success_probability = 1.0;
    std::optional<double> fidelity_to_ideal;
};

namespace detail {

inline void check_tail(double captured, const Truncation& t, const char* who) {
    const double tail = 1.0 - captured;
    if (tail >= t.tail_epsilon)
        throw truncation_error(std::string(who) + ": truncated tail probability " +
                               std::to_string(tail) + " exceeds tail_epsilon " +
                               std::to_string(t.tail_epsilon) + " at cutoff " +
                               std::to_string(t.cutoff));
}

}  // namespace detail

inline SingleModeState fock_state(int n, const Truncation& trunc) {
    if (n < 0 || n > trunc.cutoff)
        throw std::invalid_argument("fock_state: index outside truncation");
    Vec v = Vec::Zero(trunc.dim());
    v[n] = 1.0;
    return SingleModeState(std::move(v), trunc);
}

inline SingleModeState vacuum(const Truncation& trunc) { return fock_state(0, trunc); }

/// |alpha>: amplitudes e^{-alpha^2/2} alpha^n / sqrt(n!).
inline SingleModeState coherent(double alpha, const Truncation& trunc) {
    if (alpha < 0) throw std::domain_error("coherent: alpha must be >= 0");
    Vec v = Vec::Zero(trunc.dim());
    double c = std::exp(-alpha * alpha / 2.0);
    detail::KahanSum captured;
    for (int n = 0; n < trunc.dim(); ++n) {
        v[n] = c;
        captured.add(c * c);
        c *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    detail::check_tail(captured.value(), trunc, "coherent");
    return SingleModeState(std::move(v), trunc);
}

/// S(r)|0> with S(r) = exp[-(r/2)(a^2 - a^dag^2)]:
/// c_{2j} = (cosh r)^{-1/2} sqrt((2j)!)/(2^j j!) (tanh r)^j, odd entries 0.
inline SingleModeState squeezed_vacuum(double r, const Truncation& trunc) {
    if (r < 0) throw std::domain_error("squeezed_vacuum: r must be >= 0");
    Vec v = Vec::Zero(trunc.dim());
    const double th = std::tanh(r);
    double c = 1.0 / std::sqrt(std::cosh(r));
    detail::KahanSum captured;
    for (int j = 0; 2 * j < trunc.dim(); ++j) {
        v[2 * j] = c;
        captured.add(c * c);
        c *= th * std::sqrt((2.0 * j + 1.0) / (2.0 * j + 2.0));
    }
    detail::check_tail(captured.value(), trunc, "squeezed_vacuum");
    return SingleModeState(std::move(v), trunc);
}

/// Cat state N_alpha^pm (|alpha> pm |-alpha>); even (+) keeps even Fock
/// support, odd (-) keeps odd support.
inline SingleModeState css(double alpha, Parity parity, const Truncation& trunc) {
    if (alpha < 0) throw std::domain_error("css: alpha must be >= 0");
    if (parity == Parity::Odd && alpha == 0.0)
        throw std::domain_error("css: odd cat at alpha = 0 is undefined");
    const double norm =
        1.0 / std::sqrt(2.0 * (1.0 + (parity == Parity::Even ? 1.0 : -1.0) *
                                         std::exp(-2.0 * alpha * alpha)));
    Vec v = Vec::Zero(trunc.dim());
    double c = std::exp(-alpha * alpha / 2.0);
    detail::KahanSum captured;
    const int want = parity == Parity::Even ? 0 : 1;
    for (int n = 0; n < trunc.dim(); ++n) {
        if (n % 2 == want) {
            v[n] = 2.0 * norm * c;
            captured.add(std::norm(v[n]));
        }
        c *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    detail::check_tail(captured.value(), trunc, "css");
    return SingleModeState(std::move(v), trunc);
}

/// (|N>_1|0>_2 + |0>_1|N>_2)/sqrt(2).
inline TwoModeState noon(int N, const Truncation& trunc) {
    if (N < 1) throw std::domain_error("noon: N must be >= 1");
    if (N > trunc.cutoff) throw std::invalid_argument("noon: N exceeds cutoff");
    Mat c = Mat::Zero(trunc.dim(), trunc.dim());
    c(N, 0) = c(0, N) = 1.0 / std::sqrt(2.0);
    return TwoModeState(std::move(c), trunc);
}

/// N^pm (|alpha>_1|0>_2 pm |0>_1|alpha>_2); nonzero coefficients live on
/// row 0 and column 0 only (a superposition of NOON states).
inline TwoModeState ecs(double alpha, Parity parity, const Truncation& trunc) {
    if (!(alpha > 0)) throw std::domain_error("ecs: alpha must be > 0");
    const double sign = parity == Parity::Even ? 1.0 : -1.0;
    const double norm = 1.0 / std::sqrt(2.0 * (1.0 + sign * std::exp(-alpha * alpha)));
    const SingleModeState coh = coherent(alpha, trunc);
    Mat c = Mat::Zero(trunc.dim(), trunc.dim());
    for (int m = 0; m < trunc.dim(); ++m) {
        c(m, 0) += norm * coh.amplitude(m);
        c(0, m) += sign * norm * coh.amplitude(m);
    }
    return TwoModeState(std::move(c), trunc);
}

/// Photon-subtracted squeezed vacuum a S(r0)|0>, Fock expansion
/// f_r sum_k sqrt((2k+1)!)/(2^k k!) (tanh r0)^k |2k+1>, f_r = (1-tanh^2)^{3/4}.
inline SingleModeState acss_closed_form(double r0, const Truncation& trunc) {
    if (!(r0 > 0))
        throw std::domain_error("acss_closed_form: a S(0)|0> has zero weight, r0 must be > 0");
    const double th = std::tanh(r0);
    Vec v = Vec::Zero(trunc.dim());
    double c = std::pow(1.0 - th * th, 0.75);
    detail::KahanSum captured;
    for (int k = 0; 2 * k + 1 < trunc.dim(); ++k) {
        v[2 * k + 1] = c;
        captured.add(c * c);
        c *= th * std::sqrt((2.0 * k + 3.0) / (2.0 * k + 2.0));
    }
    detail::check_tail(captured.value(), trunc, "acss_closed_form");
    return SingleModeState(std::move(v), trunc);
}

/// Conditional single-photon subtraction: mix with vacuum on a beam
/// splitter of transmission eta, project the reflected port onto |1>.
inline PreparationReport photon_subtract(const SingleModeState& s, double eta) {
    if (!(eta > 0.0 && eta < 1.0))
        throw std::invalid_argument("photon_subtract: eta must lie in (0,1)");
    const Truncation& t = s.truncation();
    const TwoModeState mixed = beam_splitter(tensor(s, vacuum(t)), eta);
    Vec cond = mixed.coeffs().col(1);
    detail::KahanSum w;
    for (int n = 0; n < t.dim(); ++n) w.add(std::norm(cond[n]));
    const double weight = w.value();
    if (weight <= 0.0)
        throw std::domain_error("photon_subtract: zero heralding probability");
    SingleModeState state(std::move(cond), t);
    std::optional<double> fid;
    const AnnihilationResult ann = annihilate(s);
    if (ann.weight > 0.0) fid = fidelity(state, ann.normalized());
    return PreparationReport{std::move(state), weight, fid};
}

/// Squeezing parameter used for AECS synthesis at coherent amplitude
/// alpha0: chosen so the ACSS carries the same mean photon number as the
/// ideal odd cat CSS_-(alpha0) it replaces,
///   1 + 3 sinh^2 r0 = alpha0^2 coth(alpha0^2).
/// This choice reproduces both the ~0.975 AECS/ECS fidelity and the
/// matched mean photon number of the ideal pipeline.
inline double aecs_squeezing(double alpha0) {
    if (!(alpha0 > 0)) throw std::domain_error("aecs_squeezing: alpha0 must be > 0");
    const double x = alpha0 * alpha0;
    // s2 = (x coth x - 1)/3, series for small x to avoid cancellation
    double s2;
    if (x < 1e-3)
        s2 = (x * x / 3.0 - x * x * x * x / 45.0) / 3.0;
    else
        s2 = (x / std::tanh(x) - 1.0) / 3.0;
    return std::asinh(std::sqrt(s2));
}

/// Mean photon number per arm of the AECS, in closed form. The 50:50 beam
/// splitter preserves total photon number and the output is antisymmetric,
/// so each arm carries half of <n>_ACSS + <n>_coherent.
inline double aecs_mean_photon(double alpha0) {
    const double x = alpha0 * alpha0;
    const double n_acss = x < 1e-3 ? 1.0 + (x * x / 3.0 - x * x * x * x / 45.0) : x / std::tanh(x);
    return (n_acss + x) / 2.0;
}

/// Approximate ECS: ACSS(r0(alpha0)) mixed with |alpha0> on a 50:50 beam
/// splitter. The output coefficient matrix is antisymmetric under mode
/// exchange; the global phase is fixed so H_{1,0} = C(1,0) is real positive.
inline TwoModeState aecs(double alpha0, const Truncation& trunc) {
    if (!(alpha0 > 0)) throw std::domain_error("aecs: alpha0 must be > 0");
    const double r0 = aecs_squeezing(alpha0);
    const TwoModeState input = tensor(acss_closed_form(r0, trunc), coherent(alpha0, trunc));
    return beam_splitter(input, 0.5);
}

/// One upper-triangle coefficient H_{m,m'} (m > m') of an antisymmetric
/// two-mode state.
struct HCoefficient {
    int m;
    int mprime;
    double value;
};

/// Extracts H_{m,m'} = C(m,m') for m > m' from an antisymmetric state.
/// Normalization: sum of 2 H^2 over the triangle equals 1.
inline std::vector<HCoefficient> h_coefficients(const TwoModeState& s) {
    const Mat& c = s.coeffs();
    const double asym = (c + c.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-8)
        throw std::invalid_argument("h_coefficients: state is not antisymmetric (|C+C^T|_inf = " +
                                    std::to_string(asym) + ")");
    std::vector<HCoefficient> out;
    out.reserve(static_cast<size_t>(s.dim()) * (s.dim() - 1) / 2);
    for (int m = 1; m < s.dim(); ++m)
        for (int mp = 0; mp < m; ++mp) {
            const complexd z = c(m, mp);
            if (std::abs(z.imag()) > 1e-9)
                throw std::invalid_argument("h_coefficients: coefficients are not real after phase fixing");
            out.push_back(HCoefficient{m, mp, z.real()});
        }
    return out;
}

// ---------------------------------------------------------------------------
// Adaptive truncation choices: start from a mean-photon-based guess and
// double the cutoff until the constructor's tail check passes.

namespace detail {

template <typename Build>
Truncation adapt(int start, double eps, Build&& build) {
    int cutoff = std::max(start, 4);
    for (int iter = 0; iter < 16; ++iter) {
        Truncation t(cutoff, eps);
        try {
            build(t);
            return t;
        } catch (const truncation_error&) {
            cutoff *= 2;
        }
    }
    throw truncation_error("adapt: no admissible cutoff found");
}

}  // namespace detail

inline Truncation adapt_coherent(double alpha, double eps = 1e-12) {
    const int start = static_cast<int>(std::ceil(alpha * alpha + 10.0 * alpha + 20.0));
    return detail::adapt(start, eps, [&](const Truncation& t) { coherent(alpha, t); });
}

inline Truncation adapt_squeezed(double r, double eps = 1e-12) {
    const double s = std::sinh(r);
    const int start = static_cast<int>(std::ceil(s * s + 10.0 * s + 20.0));
    return detail::adapt(start, eps, [&](const Truncation& t) { squeezed_vacuum(r, t); });
}

inline Truncation adapt_css(double alpha, Parity parity, double eps = 1e-12) {
    const int start = static_cast<int>(std::ceil(alpha * alpha + 10.0 * alpha + 20.0));
    return detail::adapt(start, eps, [&](const Truncation& t) { css(alpha, parity, t); });
}

inline Truncation adapt_acss(double r0, double eps = 1e-12) {
    const double s = std::sinh(r0);
    const int start = static_cast<int>(std::ceil(3.0 * s * s + 10.0 * s + 20.0));
    return detail::adapt(start, eps, [&](const Truncation& t) { acss_closed_form(r0, t); });
}

inline Truncation adapt_aecs(double alpha0, double eps = 1e-12) {
    const double r0 = aecs_squeezing(alpha0);
    const int start = std::max(adapt_acss(r0, eps / 4).cutoff, adapt_coherent(alpha0, eps / 4).cutoff) + 4;
    return detail::adapt(start, eps, [&](const Truncation& t) { aecs(alpha0, t); });
}

/// Builds the two-mode probe for a StateSpec. Single-mode families are
/// placed in mode 2 against vacuum in mode 1, matching the convention that
/// the phase shifter acts on mode 2.
inline TwoModeState make_probe(const StateSpec& spec, const Truncation& trunc) {
    spec.validate();
    switch (spec.family) {
        case StateFamily::Noon:
            return noon(spec.n, trunc);
        case StateFamily::EcsPlus:
            return ecs(spec.alpha, Parity::Even, trunc);
        case StateFamily::EcsMinus:
            return ecs(spec.alpha, Parity::Odd, trunc);
        case StateFamily::Aecs:
            return aecs(spec.alpha, trunc);
        case StateFamily::Coherent:
            return tensor(vacuum(trunc), coherent(spec.alpha, trunc));
        case StateFamily::CssPlus:
            return tensor(vacuum(trunc), css(spec.alpha, Parity::Even, trunc));
        case StateFamily::CssMinus:
            return tensor(vacuum(trunc), css(spec.alpha, Parity::Odd, trunc));
        case StateFamily::SqueezedVacuum:
            return tensor(vacuum(trunc), squeezed_vacuum(spec.r, trunc));
        case StateFamily::Fock:
            return tensor(vacuum(trunc), fock_state(spec.n, trunc));
    }
    throw std::logic_error("make_probe: unknown family");
}

/// Adaptive truncation for a StateSpec probe.
inline Truncation adapt_probe(const StateSpec& spec, double eps = 1e-12) {
    spec.validate();
    switch (spec.family) {
        case StateFamily::Noon:
            return Truncation(std::max(spec.n, 4), eps);
        case StateFamily::EcsPlus:
        case StateFamily::EcsMinus:
        case StateFamily::Coherent:
            return adapt_coherent(spec.alpha, eps);
        case StateFamily::Aecs:
            return adapt_aecs(spec.alpha, eps);
        case StateFamily::CssPlus:
            return adapt_css(spec.alpha, Parity::Even, eps);
        case StateFamily::CssMinus:
            return adapt_css(spec.alpha, Parity::Odd, eps);
        case StateFamily::SqueezedVacuum:
            return adapt_squeezed(spec.r, eps);
        case StateFamily::Fock:
            return Truncation(std::max(spec.n, 4), eps);
    }
    throw std::logic_error("adapt_probe: unknown family");
}

}  // namespace nlphase
