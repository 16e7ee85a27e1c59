#pragma once

#include "liepulse/integrators.hpp"
#include "liepulse/linalg.hpp"
#include "liepulse/parallel.hpp"

#include <cmath>
#include <utility>
#include <vector>

// Fidelity and analytic gradients for piecewise-constant and piecewise-linear
// control sequences. Every gradient comes from one forward trajectory, one
// backward (costate) trajectory, and propagator directional derivatives via
// the auxiliary block-matrix exponential.

namespace liepulse {

enum class Parameterization { PWC, PWL, Phase };

inline const char* parameterization_name(Parameterization p) {
    switch (p) {
        case Parameterization::PWC: return "PWC";
        case Parameterization::PWL: return "PWL";
        case Parameterization::Phase: return "PHASE";
    }
    return "?";
}

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct ControlSequence {
    Eigen::MatrixXd coefficients; // channels x points, rad/s (phase angles for Phase)
    TimeGrid grid;
    Parameterization parameterization = Parameterization::PWC;
    // Phase sequences hold one row of phase angles over a fixed-amplitude
    // two-channel pulse; phase_base selects the underlying propagation model.
    Parameterization phase_base = Parameterization::PWC;
    double phase_amplitude = 0.0; // rad/s
    BoolArray freeze;             // channels x points; empty means nothing frozen

    int channels() const { return static_cast<int>(coefficients.rows()); }
    int points() const { return static_cast<int>(coefficients.cols()); }

    int expected_points() const {
        const int n = grid.n_slices();
        const Parameterization base =
            parameterization == Parameterization::Phase ? phase_base : parameterization;
        return base == Parameterization::PWC ? n : n + 1;
    }

    void validate() const {
        grid.validate();
        if (parameterization == Parameterization::Phase) {
            if (phase_base == Parameterization::Phase)
                throw std::invalid_argument("ControlSequence: phase_base must be PWC or PWL");
            if (coefficients.rows() != 1)
                throw std::invalid_argument("ControlSequence: phase sequences have one row");
        }
        if (points() != expected_points())
            throw std::invalid_argument("ControlSequence: point count does not match the grid");
        if (freeze.size() != 0 &&
            (freeze.rows() != coefficients.rows() || freeze.cols() != coefficients.cols()))
            throw std::invalid_argument("ControlSequence: freeze mask shape mismatch");
    }
};

struct ControlProblem {
    Matrix drift;               // static drift generator
    std::vector<Matrix> drifts; // optional per-slice (PWC) or per-node (PWL) drifts
    std::vector<Matrix> controls;
    Vector rho0, delta; // unit 2-norm
    ControlSequence sequence;

    const Matrix& drift_at(int index) const {
        return drifts.empty() ? drift : drifts.at(static_cast<std::size_t>(index));
    }

    void validate() const {
        sequence.validate();
        const int n_controls =
            sequence.parameterization == Parameterization::Phase ? 2 : sequence.channels();
        if (static_cast<int>(controls.size()) != n_controls)
            throw std::invalid_argument("ControlProblem: control operator count mismatch");
        const Eigen::Index dim = rho0.size();
        if (delta.size() != dim)
            throw std::invalid_argument("ControlProblem: state dimension mismatch");
        if (std::abs(rho0.norm() - 1.0) > 1e-6 || std::abs(delta.norm() - 1.0) > 1e-6)
            throw std::invalid_argument("ControlProblem: rho0 and delta must be unit vectors");
        auto check_gen = [&](const Matrix& g) {
            require_square_finite(g, "ControlProblem");
            if (g.rows() != dim)
                throw std::invalid_argument("ControlProblem: generator dimension mismatch");
        };
        if (drifts.empty()) check_gen(drift);
        for (const Matrix& d : drifts) check_gen(d);
        for (const Matrix& c : controls) check_gen(c);
        if (!drifts.empty()) {
            const Parameterization base = sequence.parameterization == Parameterization::Phase
                                              ? sequence.phase_base
                                              : sequence.parameterization;
            const std::size_t expected = base == Parameterization::PWC
                                             ? static_cast<std::size_t>(sequence.grid.n_slices())
                                             : static_cast<std::size_t>(sequence.grid.n_slices()) + 1;
            if (drifts.size() != expected)
                throw std::invalid_argument("ControlProblem: per-slice drift count mismatch");
        }
    }
};

struct FidelityReport {
    double f = 0.0;
    Eigen::MatrixXd grad_c;   // channels x points
    Eigen::VectorXd grad_tau; // per slice; empty unless requested
};

namespace detail {

// Forward states, costates and dense slice propagators shared by the
// fidelity and slice-duration gradients. forward[s] is the state at node s;
// costate[s] is (P_{N-1} ... P_s)^dagger delta, so costate[s+1] pairs with
// forward[s] around propagator s and costate[0]^dagger rho0 recovers f.
struct Sweep {
    std::vector<Matrix> generators; // slice generators (PWC) or node generators (PWL)
    std::vector<Matrix> props;
    std::vector<Vector> forward;
    std::vector<Vector> costate;
    double f = 0.0;
};

inline Matrix node_generator(const ControlProblem& p, int index) {
    Matrix g = p.drift_at(index);
    for (std::size_t k = 0; k < p.controls.size(); ++k)
        g += p.sequence.coefficients(static_cast<Eigen::Index>(k), index) * p.controls[k];
    return g;
}

// Piecewise-linear slice exponent: A = -i*[(L+R)/2 + (i/12)[L,R]*tau]*tau.
inline Matrix pwl_exponent(const Matrix& left, const Matrix& right, double tau) {
    return Complex(0.0, -tau) *
           (0.5 * (left + right) + Complex(0.0, tau / 12.0) * commutator(left, right));
}

inline Sweep run_sweep(const ControlProblem& p, bool pwl) {
    const int n_slices = p.sequence.grid.n_slices();
    Sweep sw;

    if (pwl) {
        sw.generators.reserve(n_slices + 1);
        for (int j = 0; j <= n_slices; ++j) sw.generators.push_back(node_generator(p, j));
        sw.props.reserve(n_slices);
        for (int s = 0; s < n_slices; ++s)
            sw.props.push_back(expm(pwl_exponent(sw.generators[s], sw.generators[s + 1],
                                                 p.sequence.grid.duration(s))));
    } else {
        sw.generators.reserve(n_slices);
        sw.props.reserve(n_slices);
        for (int s = 0; s < n_slices; ++s) {
            sw.generators.push_back(node_generator(p, s));
            const double tau = p.sequence.grid.duration(s);
            sw.props.push_back(expm(Complex(0.0, -tau) * sw.generators[s]));
        }
    }

    sw.forward.resize(n_slices + 1);
    sw.forward[0] = p.rho0;
    for (int s = 0; s < n_slices; ++s) sw.forward[s + 1] = sw.props[s] * sw.forward[s];

    sw.costate.resize(n_slices + 1);
    sw.costate[n_slices] = p.delta;
    for (int s = n_slices - 1; s >= 0; --s)
        sw.costate[s] = sw.props[s].adjoint() * sw.costate[s + 1];

    sw.f = sw.costate[n_slices].dot(sw.forward[n_slices]).real();
    return sw;
}

inline double prop_derivative_overlap(const Matrix& exponent, const Matrix& direction,
                                      const Vector& costate, const Vector& forward) {
    const Matrix dprop = expm_dirdiff(exponent, direction).second;
    return costate.dot(dprop * forward).real();
}

} // namespace detail

/// Fidelity f = Re<delta|rho(T)> and its gradient with respect to the
/// piecewise-constant control coefficients: one forward trajectory, one
/// backward trajectory with Hermitian-conjugate propagators, and one
/// directional derivative per slice and channel.
inline FidelityReport fidelity_pwc(const ControlProblem& problem) {
    problem.validate();
    if (problem.sequence.parameterization != Parameterization::PWC)
        throw std::invalid_argument("fidelity_pwc: sequence is not piecewise-constant");
    const int n_slices = problem.sequence.grid.n_slices();
    const int n_channels = problem.sequence.channels();

    FidelityReport report;
    report.grad_c.resize(n_channels, n_slices);
    if (n_slices == 0) {
        report.f = problem.delta.dot(problem.rho0).real();
        return report;
    }

    const detail::Sweep sw = detail::run_sweep(problem, false);
    report.f = sw.f;
    for (int s = 0; s < n_slices; ++s) {
        const double tau = problem.sequence.grid.duration(s);
        const Matrix exponent = Complex(0.0, -tau) * sw.generators[s];
        for (int k = 0; k < n_channels; ++k) {
            const Matrix direction = Complex(0.0, -tau) * problem.controls[k];
            report.grad_c(k, s) = detail::prop_derivative_overlap(exponent, direction,
                                                                  sw.costate[s + 1],
                                                                  sw.forward[s]);
        }
    }
    return report;
}

/// Piecewise-linear fidelity and gradient. Each propagator depends on the
/// two nodes bounding its slice and adjacent propagators share a node, so
/// endpoint nodes differentiate one propagator and interior nodes pick up a
/// product-rule sum over the two adjacent propagators. Generator derivatives
/// carry the drift and control cross-commutators of the edge-commutator
/// term.
inline FidelityReport fidelity_pwl(const ControlProblem& problem) {
    problem.validate();
    if (problem.sequence.parameterization != Parameterization::PWL)
        throw std::invalid_argument("fidelity_pwl: sequence is not piecewise-linear");
    const int n_slices = problem.sequence.grid.n_slices();
    const int n_channels = problem.sequence.channels();

    FidelityReport report;
    report.grad_c = Eigen::MatrixXd::Zero(n_channels, n_slices + 1);
    if (n_slices == 0) {
        report.f = problem.delta.dot(problem.rho0).real();
        return report;
    }

    const detail::Sweep sw = detail::run_sweep(problem, true);
    report.f = sw.f;

    for (int j = 0; j <= n_slices; ++j) {
        for (int k = 0; k < n_channels; ++k) {
            const Matrix& ck = problem.controls[k];
            double g = 0.0;
            if (j >= 1) {
                // node j is the right point of slice j-1
                const int s = j - 1;
                const double tau = problem.sequence.grid.duration(s);
                const Matrix exponent =
                    detail::pwl_exponent(sw.generators[s], sw.generators[s + 1], tau);
                const Matrix dgen =
                    0.5 * ck + Complex(0.0, tau / 12.0) * commutator(sw.generators[s], ck);
                g += detail::prop_derivative_overlap(exponent, Complex(0.0, -tau) * dgen,
                                                     sw.costate[s + 1], sw.forward[s]);
            }
            if (j <= n_slices - 1) {
                // node j is the left point of slice j
                const int s = j;
                const double tau = problem.sequence.grid.duration(s);
                const Matrix exponent =
                    detail::pwl_exponent(sw.generators[s], sw.generators[s + 1], tau);
                const Matrix dgen =
                    0.5 * ck + Complex(0.0, tau / 12.0) * commutator(ck, sw.generators[s + 1]);
                g += detail::prop_derivative_overlap(exponent, Complex(0.0, -tau) * dgen,
                                                     sw.costate[s + 1], sw.forward[s]);
            }
            report.grad_c(k, j) = g;
        }
    }
    return report;
}

/// Fidelity gradient with respect to slice durations for piecewise-constant
/// sequences: d f / d tau_s = Re(-i <costate_s| L_s |rho_s>) from the stored
/// trajectories, with no additional exponentials.
inline Eigen::VectorXd slice_duration_gradient_pwc(const ControlProblem& problem) {
    problem.validate();
    if (problem.sequence.parameterization != Parameterization::PWC)
        throw std::invalid_argument("slice_duration_gradient_pwc: sequence is not PWC");
    const int n_slices = problem.sequence.grid.n_slices();
    Eigen::VectorXd grad(n_slices);
    if (n_slices == 0) return grad;
    const detail::Sweep sw = detail::run_sweep(problem, false);
    for (int s = 0; s < n_slices; ++s)
        grad[s] = (Complex(0.0, -1.0) *
                   sw.costate[s + 1].dot(sw.generators[s] * sw.forward[s + 1]))
                      .real();
    return grad;
}

/// Piecewise-linear slice-duration gradient via the auxiliary-matrix
/// directional derivative with dA/dtau = -i*(L+R)/2 + (1/6)[L,R]*tau.
inline Eigen::VectorXd slice_duration_gradient_pwl(const ControlProblem& problem) {
    problem.validate();
    if (problem.sequence.parameterization != Parameterization::PWL)
        throw std::invalid_argument("slice_duration_gradient_pwl: sequence is not PWL");
    const int n_slices = problem.sequence.grid.n_slices();
    Eigen::VectorXd grad(n_slices);
    if (n_slices == 0) return grad;
    const detail::Sweep sw = detail::run_sweep(problem, true);
    for (int s = 0; s < n_slices; ++s) {
        const double tau = problem.sequence.grid.duration(s);
        const Matrix& left = sw.generators[s];
        const Matrix& right = sw.generators[s + 1];
        const Matrix exponent = detail::pwl_exponent(left, right, tau);
        const Matrix dexponent =
            Complex(0.0, -0.5) * (left + right) + (tau / 6.0) * commutator(left, right);
        grad[s] = detail::prop_derivative_overlap(exponent, dexponent, sw.costate[s + 1],
                                                  sw.forward[s]);
    }
    return grad;
}

struct WaveformBasis {
    Eigen::MatrixXd w; // points x M, orthonormal columns

    void validate() const {
        if (w.size() == 0) throw std::invalid_argument("WaveformBasis: empty basis");
        const Eigen::MatrixXd gram = w.transpose() * w;
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(w.cols(), w.cols());
        if ((gram - id).norm() >= 1e-10)
            throw std::invalid_argument("WaveformBasis: columns are not orthonormal");
    }
};

/// Chain rule onto an orthonormal waveform basis: grad_alpha = W^T grad_c,
/// applied per channel (rows of grad_c).
inline Eigen::MatrixXd basis_project(const Eigen::MatrixXd& grad_c, const WaveformBasis& basis) {
    basis.validate();
    if (grad_c.cols() != basis.w.rows())
        throw std::invalid_argument("basis_project: point count mismatch");
    return grad_c * basis.w;
}

/// Congruence transform of a control-space Hessian onto the waveform basis:
/// (I_K kron W)^T H (I_K kron W), where H is ordered channel-major in blocks
/// of n points.
inline Eigen::MatrixXd basis_congruence(const Eigen::MatrixXd& hessian_c, int channels,
                                        const WaveformBasis& basis) {
    basis.validate();
    if (channels < 1) throw std::invalid_argument("basis_congruence: need at least one channel");
    const Eigen::Index n = basis.w.rows();
    const Eigen::Index m = basis.w.cols();
    if (hessian_c.rows() != channels * n || hessian_c.cols() != channels * n)
        throw std::invalid_argument("basis_congruence: Hessian shape mismatch");
    Eigen::MatrixXd out(channels * m, channels * m);
    for (int a = 0; a < channels; ++a)
        for (int b = 0; b < channels; ++b)
            out.block(a * m, b * m, m, m) =
                basis.w.transpose() * hessian_c.block(a * n, b * n, n, n) * basis.w;
    return out;
}

/// Phase-modulated pulse chain rule: channels are (A cos phi, A sin phi), so
/// d f / d phi_n = A*(-sin(phi_n)*gx_n + cos(phi_n)*gy_n).
inline Eigen::VectorXd phase_chain_rule(double amplitude, const Eigen::VectorXd& phases,
                                        const Eigen::VectorXd& grad_cx,
                                        const Eigen::VectorXd& grad_cy) {
    if (phases.size() != grad_cx.size() || phases.size() != grad_cy.size())
        throw std::invalid_argument("phase_chain_rule: length mismatch");
    Eigen::VectorXd out(phases.size());
    for (Eigen::Index n = 0; n < phases.size(); ++n)
        out[n] = amplitude *
                 (-std::sin(phases[n]) * grad_cx[n] + std::cos(phases[n]) * grad_cy[n]);
    return out;
}

/// Fidelity of a phase-modulated sequence: expands phases into the fixed
/// amplitude IQ pair, evaluates under the base parameterization, and maps
/// the gradient back through the phase chain rule.
inline FidelityReport fidelity_phase(const ControlProblem& problem) {
    problem.validate();
    const ControlSequence& seq = problem.sequence;
    if (seq.parameterization != Parameterization::Phase)
        throw std::invalid_argument("fidelity_phase: sequence is not phase-modulated");

    ControlProblem iq = problem;
    iq.sequence.parameterization = seq.phase_base;
    iq.sequence.coefficients.resize(2, seq.points());
    for (int n = 0; n < seq.points(); ++n) {
        const double phi = seq.coefficients(0, n);
        iq.sequence.coefficients(0, n) = seq.phase_amplitude * std::cos(phi);
        iq.sequence.coefficients(1, n) = seq.phase_amplitude * std::sin(phi);
    }
    if (seq.freeze.size() != 0) {
        iq.sequence.freeze.resize(2, seq.points());
        iq.sequence.freeze.row(0) = seq.freeze.row(0);
        iq.sequence.freeze.row(1) = seq.freeze.row(0);
    }

    const FidelityReport base = iq.sequence.parameterization == Parameterization::PWC
                                    ? fidelity_pwc(iq)
                                    : fidelity_pwl(iq);
    FidelityReport report;
    report.f = base.f;
    report.grad_c.resize(1, seq.points());
    report.grad_c.row(0) = phase_chain_rule(seq.phase_amplitude,
                                            seq.coefficients.row(0).transpose(),
                                            base.grad_c.row(0).transpose(),
                                            base.grad_c.row(1).transpose())
                               .transpose();
    return report;
}

/// Dispatch on the sequence parameterization.
inline FidelityReport fidelity(const ControlProblem& problem) {
    switch (problem.sequence.parameterization) {
        case Parameterization::PWC: return fidelity_pwc(problem);
        case Parameterization::PWL: return fidelity_pwl(problem);
        case Parameterization::Phase: return fidelity_phase(problem);
    }
    throw std::logic_error("fidelity: unknown parameterization");
}

// A state-transfer objective sharing the generators of its parent problem.
struct TransferTarget {
    Vector rho0, delta; // unit vectors
    double weight = 1.0;
};

/// Weighted fidelity over several (rho0, delta) pairs that share one set of
/// generators: the propagators and their directional derivatives are built
/// once and applied to every pair. Equivalent to (but much cheaper than) an
/// ensemble of single-target members with identical drift and controls.
inline FidelityReport fidelity_multi_target(ControlProblem problem,
                                            const std::vector<TransferTarget>& targets) {
    if (targets.empty())
        throw std::invalid_argument("fidelity_multi_target: no targets");
    const Eigen::Index dim =
        problem.drifts.empty() ? problem.drift.rows() : problem.drifts.front().rows();
    for (const TransferTarget& t : targets) {
        if (t.rho0.size() != dim || t.delta.size() != dim)
            throw std::invalid_argument("fidelity_multi_target: target dimension mismatch");
        if (std::abs(t.rho0.norm() - 1.0) > 1e-6 || std::abs(t.delta.norm() - 1.0) > 1e-6)
            throw std::invalid_argument("fidelity_multi_target: targets must be unit vectors");
        if (t.weight < 0)
            throw std::invalid_argument("fidelity_multi_target: negative weight");
    }
    problem.rho0 = targets.front().rho0;
    problem.delta = targets.front().delta;
    problem.validate();

    const ControlSequence& seq = problem.sequence;
    const bool phase = seq.parameterization == Parameterization::Phase;
    ControlProblem iq = problem;
    if (phase) {
        iq.sequence.parameterization = seq.phase_base;
        iq.sequence.coefficients.resize(2, seq.points());
        for (int n = 0; n < seq.points(); ++n) {
            const double phi = seq.coefficients(0, n);
            iq.sequence.coefficients(0, n) = seq.phase_amplitude * std::cos(phi);
            iq.sequence.coefficients(1, n) = seq.phase_amplitude * std::sin(phi);
        }
    }
    const bool pwl = iq.sequence.parameterization == Parameterization::PWL;
    const int n_slices = iq.sequence.grid.n_slices();
    const int n_channels = static_cast<int>(iq.controls.size());
    const int n_points = iq.sequence.points();
    const std::size_t n_targets = targets.size();

    // one set of node generators and slice propagators
    detail::Sweep shared = detail::run_sweep(iq, pwl);

    // per-target state sweeps over the shared propagators
    std::vector<std::vector<Vector>> forward(n_targets), costate(n_targets);
    FidelityReport iq_report;
    iq_report.grad_c = Eigen::MatrixXd::Zero(n_channels, n_points);
    for (std::size_t m = 0; m < n_targets; ++m) {
        forward[m].resize(n_slices + 1);
        costate[m].resize(n_slices + 1);
        forward[m][0] = targets[m].rho0;
        for (int s = 0; s < n_slices; ++s) forward[m][s + 1] = shared.props[s] * forward[m][s];
        costate[m][n_slices] = targets[m].delta;
        for (int s = n_slices - 1; s >= 0; --s)
            costate[m][s] = shared.props[s].adjoint() * costate[m][s + 1];
        iq_report.f += targets[m].weight *
                       costate[m][n_slices].dot(forward[m][n_slices]).real();
    }

    auto accumulate = [&](int point, int channel, const Matrix& exponent,
                          const Matrix& direction, int slice) {
        const Matrix dprop = expm_dirdiff(exponent, direction).second;
        double g = 0;
        for (std::size_t m = 0; m < n_targets; ++m)
            g += targets[m].weight *
                 costate[m][slice + 1].dot(dprop * forward[m][slice]).real();
        iq_report.grad_c(channel, point) += g;
    };

    if (!pwl) {
        for (int s = 0; s < n_slices; ++s) {
            const double tau = iq.sequence.grid.duration(s);
            const Matrix exponent = Complex(0.0, -tau) * shared.generators[s];
            for (int k = 0; k < n_channels; ++k)
                accumulate(s, k, exponent, Complex(0.0, -tau) * iq.controls[k], s);
        }
    } else {
        for (int j = 0; j <= n_slices; ++j) {
            for (int k = 0; k < n_channels; ++k) {
                const Matrix& ck = iq.controls[k];
                if (j >= 1) {
                    const int s = j - 1;
                    const double tau = iq.sequence.grid.duration(s);
                    const Matrix exponent = detail::pwl_exponent(shared.generators[s],
                                                                 shared.generators[s + 1], tau);
                    const Matrix dgen = 0.5 * ck + Complex(0.0, tau / 12.0) *
                                                       commutator(shared.generators[s], ck);
                    accumulate(j, k, exponent, Complex(0.0, -tau) * dgen, s);
                }
                if (j <= n_slices - 1) {
                    const int s = j;
                    const double tau = iq.sequence.grid.duration(s);
                    const Matrix exponent = detail::pwl_exponent(shared.generators[s],
                                                                 shared.generators[s + 1], tau);
                    const Matrix dgen = 0.5 * ck + Complex(0.0, tau / 12.0) *
                                                       commutator(ck, shared.generators[s + 1]);
                    accumulate(j, k, exponent, Complex(0.0, -tau) * dgen, s);
                }
            }
        }
    }

    if (!phase) return iq_report;
    FidelityReport report;
    report.f = iq_report.f;
    report.grad_c.resize(1, seq.points());
    report.grad_c.row(0) = phase_chain_rule(seq.phase_amplitude,
                                            seq.coefficients.row(0).transpose(),
                                            iq_report.grad_c.row(0).transpose(),
                                            iq_report.grad_c.row(1).transpose())
                               .transpose();
    return report;
}

struct WeightedProblem {
    double weight = 1.0;
    ControlProblem problem;
};

/// Weighted average of member fidelities and gradients. Members share one
/// control sequence shape and are evaluated independently; the reduction
/// runs in member order so the result does not depend on the job count.
inline FidelityReport ensemble_fidelity(const std::vector<WeightedProblem>& members,
                                        int jobs = 1) {
    if (members.empty()) throw std::invalid_argument("ensemble_fidelity: empty ensemble");
    double weight_sum = 0.0;
    const ControlSequence& ref = members.front().problem.sequence;
    for (const WeightedProblem& m : members) {
        if (m.weight < 0) throw std::invalid_argument("ensemble_fidelity: negative weight");
        weight_sum += m.weight;
        const ControlSequence& seq = m.problem.sequence;
        if (seq.parameterization != ref.parameterization || seq.channels() != ref.channels() ||
            seq.points() != ref.points() ||
            seq.grid.points.size() != ref.grid.points.size())
            throw std::invalid_argument("ensemble_fidelity: members do not share sequence shape");
    }
    if (std::abs(weight_sum - 1.0) > 1e-8)
        throw std::invalid_argument("ensemble_fidelity: weights must sum to 1");

    std::vector<FidelityReport> reports(members.size());
    parallel_for(static_cast<int>(members.size()), jobs,
                 [&](int i) { reports[i] = fidelity(members[i].problem); });

    FidelityReport out;
    out.grad_c = Eigen::MatrixXd::Zero(ref.channels(), ref.points());
    for (std::size_t i = 0; i < members.size(); ++i) {
        out.f += members[i].weight * reports[i].f;
        out.grad_c += members[i].weight * reports[i].grad_c;
    }
    return out;
}

} // namespace liepulse
