// fock.hpp
// Truncated-Fock-space representation of one- and two-mode bosonic states,
// with the linear-optical primitives used throughout the library: inner
// products, tensor products, beam splitters, partial traces, number moments
// and photon annihilation.

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace nlphase {

using complexd = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

/// Thrown when probability mass beyond the configured Fock cutoff exceeds
/// the permitted tail, or when a channel application loses too much trace.
class truncation_error : public std::runtime_error {
public:
    explicit truncation_error(const std::string& what) : std::runtime_error(what) {}
};

/// Fock-space truncation policy: states keep indices 0..cutoff and promise
/// that the discarded tail probability stays below tail_epsilon.
struct Truncation {
    int cutoff;
    double tail_epsilon;

    explicit Truncation(int cutoff_, double tail_epsilon_ = 1e-12)
        : cutoff(cutoff_), tail_epsilon(tail_epsilon_) {
        if (cutoff < 0) throw std::invalid_argument("Truncation: cutoff must be >= 0");
        if (!(tail_epsilon > 0.0 && tail_epsilon < 1.0))
            throw std::invalid_argument("Truncation: tail_epsilon must be in (0,1)");
    }

    int dim() const { return cutoff + 1; }

    friend bool operator==(const Truncation& a, const Truncation& b) {
        return a.cutoff == b.cutoff && a.tail_epsilon == b.tail_epsilon;
    }
};

namespace detail {

/// Compensated (Kahan) accumulator; keeps norm and moment sums deterministic
/// and accurate when summed in increasing Fock order.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

inline double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

inline double squared_norm(const Vec& v) {
    KahanSum s;
    for (Eigen::Index n = 0; n < v.size(); ++n) s.add(std::norm(v[n]));
    return s.value();
}

inline double squared_norm(const Mat& m) {
    KahanSum s;
    // column-major order: mode-2 index outer, mode-1 index inner
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) s.add(std::norm(m(r, c)));
    return s.value();
}

/// Rotate the global phase so the first nonzero entry (in the given linear
/// scan order) is real positive. Makes amplitudes and coefficient dumps
/// deterministic.
template <typename Storage>
void fix_global_phase(Storage& a) {
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale <= 0.0) return;
    const complexd* data = a.data();
    const Eigen::Index n = a.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(data[i]) > 1e-14 * scale) {
            complexd phase = data[i] / std::abs(data[i]);
            a *= std::conj(phase);
            return;
        }
    }
}

}  // namespace detail

/// Pure single-mode state |psi> = sum_n amplitudes[n] |n>, unit norm.
class SingleModeState {
public:
    SingleModeState(Vec amplitudes, Truncation trunc)
        : amplitudes_(std::move(amplitudes)), trunc_(trunc) {
        if (amplitudes_.size() != trunc_.dim())
            throw std::invalid_argument("SingleModeState: amplitude vector size != cutoff+1");
        const double n2 = detail::squared_norm(amplitudes_);
        if (n2 <= 0.0)
            throw std::domain_error("SingleModeState: zero-norm amplitude vector");
        amplitudes_ /= std::sqrt(n2);
        detail::fix_global_phase(amplitudes_);
    }

    const Vec& amplitudes() const { return amplitudes_; }
    complexd amplitude(int n) const { return amplitudes_[n]; }
    const Truncation& truncation() const { return trunc_; }
    int cutoff() const { return trunc_.cutoff; }
    int dim() const { return trunc_.dim(); }

private:
    Vec amplitudes_;
    Truncation trunc_;
};

/// Pure two-mode state |psi>_12 = sum_{m,m'} C(m,m') |m>_1 |m'>_2, unit norm.
/// Global phase convention: scanning column-major (mode-2 index outer), the
/// first nonzero coefficient is real positive.
class TwoModeState {
public:
    TwoModeState(Mat coeffs, Truncation trunc) : coeffs_(std::move(coeffs)), trunc_(trunc) {
        check_shape();
        const double n2 = detail::squared_norm(coeffs_);
        if (n2 <= 0.0) throw std::domain_error("TwoModeState: zero-norm coefficient matrix");
        coeffs_ /= std::sqrt(n2);
        detail::fix_global_phase(coeffs_);
    }

    /// Adopt coefficients verbatim: no renormalization, no phase fixing.
    /// For operations that must preserve amplitudes exactly (phase shifts).
    static TwoModeState raw(Mat coeffs, Truncation trunc) {
        return TwoModeState(std::move(coeffs), trunc, RawTag{});
    }

    const Mat& coeffs() const { return coeffs_; }
    complexd coeff(int m, int mprime) const { return coeffs_(m, mprime); }
    const Truncation& truncation() const { return trunc_; }
    int cutoff() const { return trunc_.cutoff; }
    int dim() const { return trunc_.dim(); }

private:
    struct RawTag {};
    TwoModeState(Mat coeffs, Truncation trunc, RawTag) : coeffs_(std::move(coeffs)), trunc_(trunc) {
        check_shape();
    }
    void check_shape() const {
        if (coeffs_.rows() != trunc_.dim() || coeffs_.cols() != trunc_.dim())
            throw std::invalid_argument("TwoModeState: coefficient matrix shape != (cutoff+1)^2");
    }

    Mat coeffs_;
    Truncation trunc_;
};

/// Hermitian, unit-trace density matrix over a single-mode or flattened
/// two-mode Fock basis. Flattened index convention: i = m1 + m2*(cutoff+1).
class DensityMatrix {
public:
    DensityMatrix(Mat entries, Truncation trunc) : entries_(std::move(entries)), trunc_(trunc) {
        if (entries_.rows() != entries_.cols())
            throw std::invalid_argument("DensityMatrix: matrix must be square");
        const Eigen::Index d = entries_.rows();
        const int d1 = trunc_.dim();
        if (d != d1 && d != static_cast<Eigen::Index>(d1) * d1)
            throw std::invalid_argument(
                "DensityMatrix: dimension matches neither single-mode nor flattened two-mode basis");
        const double herm = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
        if (herm > 1e-12 * std::max(1.0, entries_.cwiseAbs().maxCoeff()))
            throw std::invalid_argument("DensityMatrix: not Hermitian within tolerance");
        entries_ = (entries_ + entries_.adjoint()) / 2.0;  // symmetrize rounding noise
        const double tr = entries_.trace().real();
        if (std::abs(tr - 1.0) > 1e-10)
            throw truncation_error("DensityMatrix: trace deviates from 1 by " +
                                   std::to_string(std::abs(tr - 1.0)));
    }

    const Mat& entries() const { return entries_; }
    const Truncation& truncation() const { return trunc_; }
    Eigen::Index dim() const { return entries_.rows(); }
    bool is_two_mode() const { return entries_.rows() == static_cast<Eigen::Index>(trunc_.dim()) * trunc_.dim(); }

    Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Mat> es(entries_, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }

private:
    Mat entries_;
    Truncation trunc_;
};

namespace detail {
inline void require_same_truncation(const Truncation& a, const Truncation& b, const char* op) {
    if (!(a == b))
        throw std::invalid_argument(std::string(op) + ": operands have mismatched truncations");
}
}  // namespace detail

inline complexd inner_product(const SingleModeState& a, const SingleModeState& b) {
    detail::require_same_truncation(a.truncation(), b.truncation(), "inner_product");
    detail::KahanSum re, im;
    for (int n = 0; n < a.dim(); ++n) {
        complexd t = std::conj(a.amplitude(n)) * b.amplitude(n);
        re.add(t.real());
        im.add(t.imag());
    }
    return {re.value(), im.value()};
}

inline complexd inner_product(const TwoModeState& a, const TwoModeState& b) {
    detail::require_same_truncation(a.truncation(), b.truncation(), "inner_product");
    detail::KahanSum re, im;
    for (int c = 0; c < a.dim(); ++c)
        for (int r = 0; r < a.dim(); ++r) {
            complexd t = std::conj(a.coeff(r, c)) * b.coeff(r, c);
            re.add(t.real());
            im.add(t.imag());
        }
    return {re.value(), im.value()};
}

template <typename State>
double fidelity(const State& a, const State& b) {
    return std::norm(inner_product(a, b));
}

inline TwoModeState tensor(const SingleModeState& a, const SingleModeState& b) {
    detail::require_same_truncation(a.truncation(), b.truncation(), "tensor");
    Mat c = a.amplitudes() * b.amplitudes().transpose();
    return TwoModeState(std::move(c), a.truncation());
}

/// Lossless beam splitter with transmission eta, phase convention
///   a1 -> sqrt(eta) a1 + sqrt(1-eta) a2,
///   a2 -> sqrt(eta) a2 - sqrt(1-eta) a1,
/// so that coherent amplitudes transform by the rotation
/// [[t, r], [-r, t]] with t = sqrt(eta), r = sqrt(1-eta).
///
/// The Fock-basis unitary is block diagonal over total-photon-number sectors
/// M; each (M+1)x(M+1) block is built by the spinor product recursion (add
/// one spin-1/2 per photon), which is numerically orthogonal to ~1e-13 even
/// for M in the hundreds. Sectors are generated and applied in streaming
/// fashion, so memory stays O(cutoff^2).
class BeamSplitter {
public:
    BeamSplitter(Truncation trunc, double transmission) : trunc_(trunc), eta_(transmission) {
        if (!(eta_ >= 0.0 && eta_ <= 1.0))
            throw std::invalid_argument("BeamSplitter: transmission must lie in [0,1]");
    }

    double transmission() const { return eta_; }

    TwoModeState apply(const TwoModeState& s) const {
        detail::require_same_truncation(s.truncation(), trunc_, "BeamSplitter::apply");
        Mat out = apply_raw(s.coeffs());
        return TwoModeState(std::move(out), trunc_);
    }

    /// Applies the sector rotations to a coefficient matrix. Amplitude
    /// rotated beyond the cutoff in either mode is dropped; if the dropped
    /// probability reaches tail_epsilon a truncation_error is thrown.
    Mat apply_raw(const Mat& c) const {
        const int d = trunc_.dim();
        const int mmax = 2 * (d - 1);
        const double t = std::sqrt(eta_);
        const double r = std::sqrt(1.0 - eta_);
        // Base 2x2 block in the basis {0,1} = photons in mode 1.
        const double e00 = t, e01 = -r, e10 = r, e11 = t;

        Mat out = Mat::Zero(d, d);
        out(0, 0) = c(0, 0);
        detail::KahanSum lost;

        Eigen::MatrixXd sector(1, 1);
        sector(0, 0) = 1.0;
        Eigen::VectorXd up(mmax + 2), down(mmax + 2);
        Eigen::VectorXd vr, vi, wr, wi;
        for (int n = 0; n < mmax; ++n) {
            // Grow the sector rotation from M = n to M = n + 1.
            const int m = n + 1;
            const double inv = 1.0 / static_cast<double>(m);
            for (int q = 0; q <= m; ++q) {
                up[q] = std::sqrt(q * inv);
                down[q] = std::sqrt((m - q) * inv);
            }
            Eigen::MatrixXd next = Eigen::MatrixXd::Zero(m + 1, m + 1);
            const Eigen::VectorXd dn = down.head(m);
            const Eigen::VectorXd ut = up.segment(1, m);
            next.topLeftCorner(m, m) += e00 * (dn.asDiagonal() * sector * dn.asDiagonal());
            next.topRightCorner(m, m) += e01 * (dn.asDiagonal() * sector * ut.asDiagonal());
            next.bottomLeftCorner(m, m) += e10 * (ut.asDiagonal() * sector * dn.asDiagonal());
            next.bottomRightCorner(m, m) += e11 * (ut.asDiagonal() * sector * ut.asDiagonal());
            sector.swap(next);

            // Apply sector M = m: basis index q = photons in mode 1.
            vr.setZero(m + 1);
            vi.setZero(m + 1);
            bool any = false;
            for (int q = std::max(0, m - d + 1); q <= std::min(m, d - 1); ++q) {
                const complexd z = c(q, m - q);
                vr[q] = z.real();
                vi[q] = z.imag();
                any = any || (z != complexd{0.0, 0.0});
            }
            if (!any) continue;
            wr.noalias() = sector * vr;
            wi.noalias() = sector * vi;
            for (int q = 0; q <= m; ++q) {
                const int m2 = m - q;
                if (q < d && m2 < d)
                    out(q, m2) = complexd(wr[q], wi[q]);
                else
                    lost.add(wr[q] * wr[q] + wi[q] * wi[q]);
            }
        }
        if (lost.value() >= trunc_.tail_epsilon)
            throw truncation_error("BeamSplitter: probability " + std::to_string(lost.value()) +
                                   " rotated past cutoff " + std::to_string(d - 1) +
                                   " (tail_epsilon " + std::to_string(trunc_.tail_epsilon) +
                                   "); increase the cutoff");
        return out;
    }

private:
    Truncation trunc_;
    double eta_;
};

inline TwoModeState beam_splitter(const TwoModeState& s, double transmission) {
    return BeamSplitter(s.truncation(), transmission).apply(s);
}

/// Reduced density matrix of one mode of a pure two-mode state.
inline DensityMatrix partial_trace(const TwoModeState& s, int keep) {
    const Mat& c = s.coeffs();
    Mat rho;
    if (keep == 1)
        rho = c * c.adjoint();
    else if (keep == 2)
        rho = c.transpose() * c.conjugate();
    else
        throw std::invalid_argument("partial_trace: keep must be 1 or 2");
    return DensityMatrix(std::move(rho), s.truncation());
}

/// Reduced density matrix of one mode of a flattened two-mode density matrix.
inline DensityMatrix partial_trace(const DensityMatrix& rho, int keep) {
    if (!rho.is_two_mode())
        throw std::invalid_argument("partial_trace: density matrix is not two-mode");
    if (keep != 1 && keep != 2) throw std::invalid_argument("partial_trace: keep must be 1 or 2");
    const int d = rho.truncation().dim();
    const Mat& e = rho.entries();
    Mat red = Mat::Zero(d, d);
    // flattened index i = m1 + m2*d
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int s = 0; s < d; ++s) {
                if (keep == 1)
                    red(a, b) += e(a + s * d, b + s * d);
                else
                    red(a, b) += e(s + a * d, s + b * d);
            }
    return DensityMatrix(std::move(red), rho.truncation());
}

/// <(n_mode)^k> for a pure two-mode state; k = 0 returns 1 by definition.
inline double number_moment(const TwoModeState& s, int mode, int k) {
    if (mode != 1 && mode != 2) throw std::invalid_argument("number_moment: mode must be 1 or 2");
    if (k < 0) throw std::invalid_argument("number_moment: k must be >= 0");
    if (k == 0) return 1.0;
    detail::KahanSum acc;
    const Mat& c = s.coeffs();
    for (int m2 = 0; m2 < s.dim(); ++m2)
        for (int m1 = 0; m1 < s.dim(); ++m1) {
            const double idx = static_cast<double>(mode == 1 ? m1 : m2);
            acc.add(std::norm(c(m1, m2)) * std::pow(idx, k));
        }
    return acc.value();
}

inline double number_moment(const SingleModeState& s, int k) {
    if (k < 0) throw std::invalid_argument("number_moment: k must be >= 0");
    if (k == 0) return 1.0;
    detail::KahanSum acc;
    for (int n = 0; n < s.dim(); ++n)
        acc.add(std::norm(s.amplitude(n)) * std::pow(static_cast<double>(n), k));
    return acc.value();
}

/// Result of applying the annihilation operator: unnormalized amplitudes and
/// the squared norm (the heralding weight). weight == <n> of the input.
struct AnnihilationResult {
    Vec amplitudes;
    Truncation truncation;
    double weight;

    SingleModeState normalized() const {
        if (weight <= 0.0)
            throw std::domain_error("AnnihilationResult: zero weight, state is undefined");
        return SingleModeState(amplitudes, truncation);
    }
};

inline AnnihilationResult annihilate(const SingleModeState& s) {
    Vec out = Vec::Zero(s.dim());
    for (int n = 0; n + 1 < s.dim(); ++n)
        out[n] = std::sqrt(static_cast<double>(n + 1)) * s.amplitude(n + 1);
    detail::KahanSum w;
    for (int n = 0; n < s.dim(); ++n) w.add(std::norm(out[n]));
    return AnnihilationResult{std::move(out), s.truncation(), w.value()};
}

}  // namespace nlphase
