// loss_oracle.hpp
// Exact quantum Fisher information of the lossy nonlinear interferometer.
// The loss channel on the sensing mode is represented by its Kraus
// operators; the channel applies loss first and the phase second,
//   rho(phi) = sum_l U(phi) K_l |psi><psi| K_l^dag U(phi)^dag,
// which keeps the moment bounds of loss_bounds.hpp valid as upper bounds.
// The QFI is evaluated from the symmetric logarithmic derivative via the
// spectral formula, either densely (reference path) or through a low-rank
// factorization that never forms the (cutoff+1)^2-dimensional density
// matrix (fast path used by the sweeps).

#pragma once

#include <Eigen/Dense>

#include "loss_bounds.hpp"

namespace nlphase {

/// Kraus operators of a transmission-T loss channel on one mode,
/// K_l[n-l][n] = sqrt(C(n,l) T^{n-l} (1-T)^l), l = 0..cutoff.
inline std::vector<Eigen::MatrixXd> loss_kraus(int dim, double T) {
    if (dim < 1) throw std::invalid_argument("loss_kraus: dim must be >= 1");
    if (!(T >= 0.0 && T <= 1.0))
        throw std::domain_error("loss_kraus: transmission must lie in [0,1]");
    std::vector<Eigen::MatrixXd> ks;
    if (T == 1.0) {
        ks.push_back(Eigen::MatrixXd::Identity(dim, dim));
        return ks;
    }
    const double logT = T > 0.0 ? std::log(T) : 0.0;
    const double logR = std::log(1.0 - T);
    for (int l = 0; l < dim; ++l) {
        Eigen::MatrixXd k = Eigen::MatrixXd::Zero(dim, dim);
        for (int n = l; n < dim; ++n) {
            const double logc = detail::log_factorial(n) - detail::log_factorial(l) -
                                detail::log_factorial(n - l);
            if (T == 0.0) {
                k(n - l, n) = n == l ? 1.0 : 0.0;
            } else {
                k(n - l, n) = std::exp(0.5 * (logc + (n - l) * logT + l * logR));
            }
        }
        ks.push_back(std::move(k));
    }
    return ks;
}

/// Lossy probe in factored form. Column l of V is the (unnormalized)
/// branch vector vec(C K_l^T) of the loss channel applied to mode 2 of a
/// pure probe with coefficient matrix C; column l of W is the phi
/// derivative of the corresponding branch of rho(phi) at phi = 0, i.e.
/// n_2^k V. Then rho = V V^dag and drho/dphi = i (W V^dag - V W^dag).
struct LossyState {
    Eigen::MatrixXcd V;
    Eigen::MatrixXcd W;
    Truncation trunc;

    Eigen::MatrixXcd rho() const { return V * V.adjoint(); }
    Eigen::MatrixXcd drho() const {
        const Eigen::MatrixXcd vw = V * W.adjoint();
        return complexd(0, 1) * (vw.adjoint() - vw);
    }
};

/// Applies the transmission-T loss channel to mode 2 of a pure probe and
/// records the phase generator of order k in factored form.
inline LossyState loss_channel(const TwoModeState& s, double T, int k) {
    if (k < 1) throw std::domain_error("loss_channel: order k must be >= 1");
    const int dim = s.dim();
    const auto kraus = loss_kraus(dim, T);
    const int nk = static_cast<int>(kraus.size());
    Eigen::VectorXd gen(dim);
    for (int n = 0; n < dim; ++n) gen[n] = std::pow(static_cast<double>(n), k);

    LossyState out{Eigen::MatrixXcd(dim * dim, nk), Eigen::MatrixXcd(dim * dim, nk),
                   s.truncation()};
    for (int l = 0; l < nk; ++l) {
        const Mat branch = s.coeffs() * kraus[l].transpose();
        const Mat deriv = branch * gen.asDiagonal();
        out.V.col(l) = Eigen::Map<const Vec>(branch.data(), dim * dim);
        out.W.col(l) = Eigen::Map<const Vec>(deriv.data(), dim * dim);
    }
    return out;
}

/// Exact QFI from rho and drho/dphi via the SLD spectral formula,
///   F = sum_{i,j: p_i + p_j > 0} 2 |<i|drho|j>|^2 / (p_i + p_j).
/// Dense reference implementation; eigenvalues below `floor` are treated
/// as zero (their pair terms are picked up through the partner index).
inline double mixed_qfi_exact(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& drho,
                              double floor = 1e-12) {
    if (rho.rows() != rho.cols() || drho.rows() != drho.cols() || rho.rows() != drho.rows())
        throw std::invalid_argument("mixed_qfi_exact: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("mixed_qfi_exact: eigendecomposition failed");
    const Eigen::VectorXd p = es.eigenvalues();
    const Eigen::MatrixXcd u = es.eigenvectors();
    const Eigen::MatrixXcd d = u.adjoint() * drho * u;
    double f = 0.0;
    const int n = static_cast<int>(p.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double denom = p[i] + p[j];
            if (denom > floor) f += 2.0 * std::norm(d(i, j)) / denom;
        }
    return f;
}

/// Exact QFI of a factored lossy state without forming rho. Projects onto
/// the support of rho via a QR of V, then applies the spectral formula in
/// the (rank x rank) support block and adds the support-kernel cross
/// terms 4 ||P_ker drho e_i||^2 / p_i.
inline double mixed_qfi_exact(const LossyState& ls, double floor = 1e-12) {
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(ls.V);
    const int cols = static_cast<int>(ls.V.cols());
    const Eigen::MatrixXcd q =
        qr.householderQ() * Eigen::MatrixXcd::Identity(ls.V.rows(), cols);
    const Eigen::MatrixXcd qv = q.adjoint() * ls.V;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(qv * qv.adjoint());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("mixed_qfi_exact: small eigenproblem failed");
    const Eigen::VectorXd lam = es.eigenvalues();
    std::vector<int> keep;
    for (int i = 0; i < lam.size(); ++i)
        if (lam[i] > floor) keep.push_back(i);
    const int r = static_cast<int>(keep.size());
    Eigen::MatrixXcd sup(ls.V.rows(), r);
    Eigen::VectorXd p(r);
    for (int i = 0; i < r; ++i) {
        sup.col(i) = q * es.eigenvectors().col(keep[i]);
        p[i] = lam[keep[i]];
    }
    const Eigen::MatrixXcd a = sup.adjoint() * ls.W;
    const Eigen::MatrixXcd b = sup.adjoint() * ls.V;
    const Eigen::MatrixXcd m =
        complexd(0, 1) * (a * b.adjoint() - b * a.adjoint());
    double f = 0.0;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            const double denom = p[i] + p[j];
            if (denom > floor) f += 2.0 * std::norm(m(i, j)) / denom;
        }
    // kernel block: drho maps support vectors partly outside the support
    const Eigen::MatrixXcd de =
        complexd(0, 1) * (ls.W * (ls.V.adjoint() * sup) - ls.V * (ls.W.adjoint() * sup));
    for (int i = 0; i < r; ++i) {
        const double full = de.col(i).squaredNorm();
        const double insup = (sup.adjoint() * de.col(i)).squaredNorm();
        f += 4.0 * std::max(full - insup, 0.0) / p[i];
    }
    return f;
}

/// One row of a loss sweep: bound and exact value side by side.
struct OracleRow {
    double transmission;
    double cq;
    double delta_phi_bound;
    double qfi_exact;
    double delta_phi_exact;
    bool dominated;  // cq >= qfi_exact within tolerance
};

/// Evaluates bound and exact QFI of a probe across transmissions.
inline std::vector<OracleRow> oracle_sweep(const TwoModeState& probe, int k,
                                           const std::vector<double>& transmissions,
                                           double tol = 1e-6) {
    const MomentSet m = moments_of(probe);
    std::vector<OracleRow> rows;
    rows.reserve(transmissions.size());
    for (double T : transmissions) {
        const LossySensitivity b = lossy_sensitivity(m, LossModel(T), k);
        const double f = mixed_qfi_exact(loss_channel(probe, T, k));
        OracleRow row;
        row.transmission = T;
        row.cq = b.cq;
        row.delta_phi_bound = b.delta_phi_bound;
        row.qfi_exact = f;
        row.delta_phi_exact =
            f > 0.0 ? 1.0 / std::sqrt(f) : std::numeric_limits<double>::infinity();
        row.dominated = b.cq >= f - tol;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace nlphase
