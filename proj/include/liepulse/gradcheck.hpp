#pragma once

#include "liepulse/grape.hpp"

#include <cstdint>
#include <random>

// Finite-difference audit of every analytic gradient family against central
// differences on randomly generated control problems.

namespace liepulse {

namespace detail {

inline double gc_uniform(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * ((g() >> 11) * 0x1.0p-53);
}

inline Matrix gc_random_generator(std::mt19937_64& g, int dim, bool hermitian, double scale) {
    Matrix m(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i)
            m(i, j) = Complex(gc_uniform(g, -1, 1), gc_uniform(g, -1, 1));
    if (hermitian) m = 0.5 * (m + m.adjoint()).eval();
    return scale * m;
}

inline Vector gc_random_state(std::mt19937_64& g, int dim) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = Complex(gc_uniform(g, -1, 1), gc_uniform(g, -1, 1));
    return v / v.norm();
}

} // namespace detail

/// Random control problem with dimension <= 16, two channels, and a
/// nonuniform grid. Half the draws use Hermitian generators, half general
/// complex ones (dissipative Liouvillians are not Hermitian).
inline ControlProblem random_control_problem(std::uint64_t seed, Parameterization param) {
    std::mt19937_64 g(seed);
    const int dims[] = {3, 4, 6, 9, 16};
    const int dim = dims[g() % 5];
    const int n_slices = 3 + static_cast<int>(g() % 4);
    const bool hermitian = (g() % 2) == 0;

    ControlProblem p;
    p.drift = detail::gc_random_generator(g, dim, hermitian, 1.0);
    p.controls.push_back(detail::gc_random_generator(g, dim, hermitian, 1.0));
    p.controls.push_back(detail::gc_random_generator(g, dim, hermitian, 1.0));
    p.rho0 = detail::gc_random_state(g, dim);
    p.delta = detail::gc_random_state(g, dim);

    ControlSequence& seq = p.sequence;
    seq.grid.points.resize(n_slices + 1);
    seq.grid.points[0] = 0.0;
    for (int s = 0; s < n_slices; ++s)
        seq.grid.points[s + 1] = seq.grid.points[s] + detail::gc_uniform(g, 0.1, 0.5);
    seq.parameterization = param;

    const bool phase = param == Parameterization::Phase;
    if (phase) {
        seq.phase_base = (g() % 2) == 0 ? Parameterization::PWC : Parameterization::PWL;
        seq.phase_amplitude = detail::gc_uniform(g, 0.5, 1.5);
    }
    const int n_points = seq.expected_points();
    seq.coefficients.resize(phase ? 1 : 2, n_points);
    for (Eigen::Index k = 0; k < seq.coefficients.rows(); ++k)
        for (int n = 0; n < n_points; ++n)
            seq.coefficients(k, n) = detail::gc_uniform(g, phase ? -3.0 : -1.0, phase ? 3.0 : 1.0);
    return p;
}

namespace detail {

template <class Eval>
double fd_max_rel_err(const Eigen::VectorXd& analytic, Eigen::VectorXd params, double h,
                      Eval&& value_at) {
    Eigen::VectorXd fd(params.size());
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        const double save = params[i];
        params[i] = save + h;
        const double fp = value_at(params);
        params[i] = save - h;
        const double fm = value_at(params);
        params[i] = save;
        fd[i] = (fp - fm) / (2 * h);
    }
    const double scale = std::max(fd.cwiseAbs().maxCoeff(), 1e-12);
    return (analytic - fd).cwiseAbs().maxCoeff() / scale;
}

inline Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

} // namespace detail

/// Max relative error of the control-coefficient gradient against central
/// finite differences with step 1e-5 * max|c|.
inline double check_control_gradient(const ControlProblem& problem) {
    const FidelityReport report = fidelity(problem);
    const Eigen::MatrixXd& c0 = problem.sequence.coefficients;
    const double h = 1e-5 * std::max(c0.cwiseAbs().maxCoeff(), 1.0);
    return detail::fd_max_rel_err(
        detail::flatten(report.grad_c), detail::flatten(c0), h,
        [&](const Eigen::VectorXd& params) {
            ControlProblem p = problem;
            p.sequence.coefficients =
                Eigen::Map<const Eigen::MatrixXd>(params.data(), c0.rows(), c0.cols());
            return fidelity(p).f;
        });
}

/// Max relative error of the slice-duration gradient against central finite
/// differences on the duration vector.
inline double check_duration_gradient(const ControlProblem& problem) {
    const bool pwl = problem.sequence.parameterization == Parameterization::PWL;
    const Eigen::VectorXd analytic =
        pwl ? slice_duration_gradient_pwl(problem) : slice_duration_gradient_pwc(problem);
    const int n_slices = problem.sequence.grid.n_slices();
    Eigen::VectorXd tau(n_slices);
    for (int s = 0; s < n_slices; ++s) tau[s] = problem.sequence.grid.duration(s);
    const double h = 1e-5 * tau.minCoeff();
    return detail::fd_max_rel_err(analytic, tau, h, [&](const Eigen::VectorXd& t) {
        ControlProblem p = problem;
        for (int s = 0; s < n_slices; ++s)
            p.sequence.grid.points[s + 1] = p.sequence.grid.points[s] + t[s];
        return (pwl ? fidelity_pwl(p) : fidelity_pwc(p)).f;
    });
}

struct GradAuditReport {
    double pwc_controls = 0.0;
    double pwl_controls = 0.0;
    double pwc_durations = 0.0;
    double pwl_durations = 0.0;
    double phase = 0.0;

    double worst() const {
        return std::max({pwc_controls, pwl_controls, pwc_durations, pwl_durations, phase});
    }
};

/// Runs the finite-difference audit over n_problems random problems per
/// gradient family and returns the max relative error seen in each family.
inline GradAuditReport audit_gradients(std::uint64_t seed, int n_problems) {
    GradAuditReport report;
    for (int i = 0; i < n_problems; ++i) {
        const std::uint64_t s = seed + 1000003ULL * static_cast<std::uint64_t>(i);
        const ControlProblem pwc = random_control_problem(s, Parameterization::PWC);
        const ControlProblem pwl = random_control_problem(s + 1, Parameterization::PWL);
        const ControlProblem ph = random_control_problem(s + 2, Parameterization::Phase);
        report.pwc_controls = std::max(report.pwc_controls, check_control_gradient(pwc));
        report.pwl_controls = std::max(report.pwl_controls, check_control_gradient(pwl));
        report.pwc_durations = std::max(report.pwc_durations, check_duration_gradient(pwc));
        report.pwl_durations = std::max(report.pwl_durations, check_duration_gradient(pwl));
        report.phase = std::max(report.phase, check_control_gradient(ph));
    }
    return report;
}

} // namespace liepulse
