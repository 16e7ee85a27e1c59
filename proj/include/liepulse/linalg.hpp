#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

// Dense complex linear algebra kernels: commutators, matrix exponentials,
// and the exponential action on vectors via the reordered Taylor sum that
// needs only operator-vector products. The one/two/three-point action
// kernels cost exactly 1/4/5 operator applications per Taylor term.

namespace liepulse {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Shared series controls. Substeps are sized so the per-substep generator
// 1-norm stays at or below unity, where the scaled Taylor series converges
// quickly and monotonically in the norm.
inline constexpr double taylor_tol = 1e-14;
inline constexpr int max_taylor_terms = 64;
inline constexpr double substep_norm_budget = 1.0;

inline double norm1(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return a.cwiseAbs().colwise().sum().maxCoeff();
}

inline void require_square_finite(const Matrix& a, const char* who) {
    if (a.rows() != a.cols())
        throw std::invalid_argument(std::string(who) + ": matrix must be square");
    if (!a.allFinite())
        throw std::invalid_argument(std::string(who) + ": matrix has non-finite entries");
}

// Relative Frobenius deviation from Hermiticity; zero matrix counts as Hermitian.
inline double hermiticity_error(const Matrix& a) {
    const double scale = a.norm();
    if (scale == 0.0) return 0.0;
    return (a - a.adjoint()).norm() / scale;
}

inline bool is_hermitian(const Matrix& a, double rel_tol = 1e-12) {
    return hermiticity_error(a) < rel_tol;
}

// Substep count for exponentiating a generator of the given 1-norm over dt.
inline int substeps_for(double generator_norm1, double dt) {
    const double budget = generator_norm1 * std::abs(dt) / substep_norm_budget;
    if (!std::isfinite(budget))
        throw std::invalid_argument("substeps_for: non-finite norm budget");
    if (budget > 1e8)
        throw std::invalid_argument("substeps_for: generator norm times dt is too large (" +
                                    std::to_string(budget) + " substeps required)");
    return std::max(1, static_cast<int>(std::ceil(budget)));
}

inline Matrix commutator(const Matrix& a, const Matrix& b) {
    require_square_finite(a, "commutator");
    require_square_finite(b, "commutator");
    if (a.rows() != b.rows())
        throw std::invalid_argument("commutator: dimension mismatch");
    Matrix c = a * b;
    c.noalias() -= b * a;
    return c;
}

/// Matrix exponential by scaling-and-squaring over the scaled Taylor series
/// (same code path and tolerances as the action kernels below).
inline Matrix expm(const Matrix& a) {
    require_square_finite(a, "expm");
    const Eigen::Index n = a.rows();
    if (n == 0) return a;

    int squarings = 0;
    const double nrm = norm1(a);
    if (nrm > substep_norm_budget)
        squarings = static_cast<int>(std::ceil(std::log2(nrm / substep_norm_budget)));

    Matrix scaled = a * std::ldexp(1.0, -squarings);
    Matrix sum = Matrix::Identity(n, n);
    Matrix term = Matrix::Identity(n, n);
    Matrix prod(n, n);
    bool converged = false;
    for (int k = 1; k <= max_taylor_terms; ++k) {
        prod.noalias() = scaled * term;
        term = prod * (1.0 / k);
        sum += term;
        const double tn = term.norm();
        if (tn == 0.0 || tn < taylor_tol * sum.norm()) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw std::runtime_error("expm: Taylor series did not converge within " +
                                 std::to_string(max_taylor_terms) + " terms");
    for (int s = 0; s < squarings; ++s) {
        prod.noalias() = sum * sum;
        sum.swap(prod);
    }
    return sum;
}

// Optional instrumentation for the action kernels; `terms` counts Taylor
// terms summed across all substeps.
struct ActionStats {
    long substeps = 0;
    long terms = 0;
};

namespace detail {

[[noreturn]] inline void throw_action_divergence(const char* who, int substep, int nsteps) {
    throw std::runtime_error(std::string(who) + ": Taylor series did not converge within " +
                             std::to_string(max_taylor_terms) + " terms at substep " +
                             std::to_string(substep) + "/" + std::to_string(nsteps));
}

} // namespace detail

/// Applies exp(-i*L*dt) to v where `apply` computes y = L*x. One operator
/// application per Taylor term; the series is restarted on each substep.
template <class Apply>
Vector expm_action(Apply&& apply, const Vector& v, double dt, int nsteps,
                   ActionStats* stats = nullptr) {
    if (nsteps < 1) throw std::invalid_argument("expm_action: nsteps must be positive");
    Vector acc = v;
    Vector term = v;
    Vector applied(v.size());
    const Complex factor(0.0, -dt / nsteps);
    for (int sub = 1; sub <= nsteps; ++sub) {
        term = acc;
        bool converged = false;
        for (int k = 1; k <= max_taylor_terms; ++k) {
            apply(term, applied);
            term = (factor / static_cast<double>(k)) * applied;
            acc += term;
            if (stats) ++stats->terms;
            const double tn = term.norm();
            if (tn == 0.0 || tn < taylor_tol * acc.norm()) {
                converged = true;
                break;
            }
        }
        if (!converged) detail::throw_action_divergence("expm_action", sub, nsteps);
        if (stats) ++stats->substeps;
    }
    return acc;
}

/// Applies exp{-i*[(L+R)/2 + (i/6)[L,R]*dt]*dt} to v. Four operator
/// applications per Taylor term: L*term and R*term are re-used inside the
/// commutator. The commutator carries dt^2/nsteps because the assembled
/// generator spans the whole interval and substepping only splits the
/// exponent.
template <class ApplyL, class ApplyR>
Vector expm_action_twopoint(ApplyL&& apply_left, ApplyR&& apply_right, const Vector& v,
                            double dt, int nsteps, ActionStats* stats = nullptr) {
    if (nsteps < 1) throw std::invalid_argument("expm_action_twopoint: nsteps must be positive");
    Vector acc = v;
    Vector term = v;
    Vector rho_a(v.size()), rho_b(v.size()), comm_lr(v.size()), comm_rl(v.size());
    const Complex linear(0.0, -0.5 * dt / nsteps);
    const double comm = dt * dt / (6.0 * nsteps);
    for (int sub = 1; sub <= nsteps; ++sub) {
        term = acc;
        bool converged = false;
        for (int k = 1; k <= max_taylor_terms; ++k) {
            apply_left(term, rho_a);
            apply_right(term, rho_b);
            apply_left(rho_b, comm_lr);
            apply_right(rho_a, comm_rl);
            const double inv_k = 1.0 / static_cast<double>(k);
            term = (linear * inv_k) * (rho_a + rho_b) + (comm * inv_k) * (comm_lr - comm_rl);
            acc += term;
            if (stats) ++stats->terms;
            const double tn = term.norm();
            if (tn == 0.0 || tn < taylor_tol * acc.norm()) {
                converged = true;
                break;
            }
        }
        if (!converged) detail::throw_action_divergence("expm_action_twopoint", sub, nsteps);
        if (stats) ++stats->substeps;
    }
    return acc;
}

/// Applies exp{-i*[(L+4M+R)/6 + (i/12)[L,R]*dt]*dt} to v (Simpson weights
/// with the edge commutator). Five operator applications per Taylor term.
template <class ApplyL, class ApplyM, class ApplyR>
Vector expm_action_threepoint(ApplyL&& apply_left, ApplyM&& apply_mid, ApplyR&& apply_right,
                              const Vector& v, double dt, int nsteps,
                              ActionStats* stats = nullptr) {
    if (nsteps < 1) throw std::invalid_argument("expm_action_threepoint: nsteps must be positive");
    Vector acc = v;
    Vector term = v;
    Vector rho_a(v.size()), rho_m(v.size()), rho_b(v.size()), comm_lr(v.size()), comm_rl(v.size());
    const Complex linear(0.0, -dt / (6.0 * nsteps));
    const double comm = dt * dt / (12.0 * nsteps);
    for (int sub = 1; sub <= nsteps; ++sub) {
        term = acc;
        bool converged = false;
        for (int k = 1; k <= max_taylor_terms; ++k) {
            apply_left(term, rho_a);
            apply_mid(term, rho_m);
            apply_right(term, rho_b);
            apply_left(rho_b, comm_lr);
            apply_right(rho_a, comm_rl);
            const double inv_k = 1.0 / static_cast<double>(k);
            term = (linear * inv_k) * (rho_a + 4.0 * rho_m + rho_b) +
                   (comm * inv_k) * (comm_lr - comm_rl);
            acc += term;
            if (stats) ++stats->terms;
            const double tn = term.norm();
            if (tn == 0.0 || tn < taylor_tol * acc.norm()) {
                converged = true;
                break;
            }
        }
        if (!converged) detail::throw_action_divergence("expm_action_threepoint", sub, nsteps);
        if (stats) ++stats->substeps;
    }
    return acc;
}

/// Exponential and its directional derivative from the auxiliary block
/// matrix exp([[a, da], [0, a]]) = [[exp(a), d exp(a)], [0, exp(a)]],
/// evaluated block-wise through the upper-triangular structure: per Taylor
/// term M_k = a*M_{k-1}/k and F_k = (a*F_{k-1} + da*M_{k-1})/k, and squaring
/// maps (P, F) to (P*P, F*P + P*F).
inline std::pair<Matrix, Matrix> expm_dirdiff(const Matrix& a, const Matrix& da) {
    require_square_finite(a, "expm_dirdiff");
    require_square_finite(da, "expm_dirdiff");
    if (a.rows() != da.rows())
        throw std::invalid_argument("expm_dirdiff: dimension mismatch");
    const Eigen::Index n = a.rows();
    if (n == 0) return {a, da};

    // block 1-norm is bounded by |a|_1 + |da|_1; scaling with the bound only
    // adds squarings
    int squarings = 0;
    const double nrm = norm1(a) + norm1(da);
    if (nrm > substep_norm_budget)
        squarings = static_cast<int>(std::ceil(std::log2(nrm / substep_norm_budget)));
    const double scale = std::ldexp(1.0, -squarings);
    Matrix a_s = a * scale;
    Matrix da_s = da * scale;

    Matrix exp_a = Matrix::Identity(n, n);
    Matrix dexp = Matrix::Zero(n, n);
    Matrix m_term = Matrix::Identity(n, n);
    Matrix f_term = Matrix::Zero(n, n);
    Matrix tmp(n, n), tmp2(n, n);
    bool converged = false;
    for (int k = 1; k <= max_taylor_terms; ++k) {
        tmp.noalias() = a_s * f_term;
        tmp.noalias() += da_s * m_term;
        f_term = tmp * (1.0 / k);
        tmp.noalias() = a_s * m_term;
        m_term = tmp * (1.0 / k);
        exp_a += m_term;
        dexp += f_term;
        const double tn = m_term.norm() + f_term.norm();
        if (tn == 0.0 || tn < taylor_tol * (exp_a.norm() + dexp.norm())) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw std::runtime_error("expm_dirdiff: Taylor series did not converge within " +
                                 std::to_string(max_taylor_terms) + " terms");
    for (int s = 0; s < squarings; ++s) {
        tmp.noalias() = dexp * exp_a;
        tmp2.noalias() = exp_a * dexp;
        dexp = tmp + tmp2;
        tmp.noalias() = exp_a * exp_a;
        exp_a.swap(tmp);
    }
    return {exp_a, dexp};
}

// Wraps a dense matrix as an operator-apply callback. The matrix is captured
// by reference and must outlive the returned callable.
inline auto matrix_apply(const Matrix& m) {
    return [&m](const Vector& x, Vector& y) { y.noalias() = m * x; };
}

} // namespace liepulse
