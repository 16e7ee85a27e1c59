#pragma once

#include "liepulse/linalg.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

// Time-stepping rules over sampled or state-dependent generators. All rules
// advance d/dt rho = -i*L(t[,rho])*rho; the left-point rule is the
// piecewise-constant baseline, the midpoint rule its centred variant, and
// the two/three-point rules add the edge commutator so the approximation is
// made at the level of the generator of the exponential map.

namespace liepulse {

struct TimeGrid {
    std::vector<double> points; // strictly increasing

    static TimeGrid uniform(double t0, double t1, int n_slices) {
        if (n_slices < 0) throw std::invalid_argument("TimeGrid: negative slice count");
        if (!(t1 > t0) && n_slices > 0)
            throw std::invalid_argument("TimeGrid: end time must exceed start time");
        TimeGrid g;
        g.points.resize(n_slices + 1);
        const double h = n_slices > 0 ? (t1 - t0) / n_slices : 0.0;
        for (int i = 0; i <= n_slices; ++i) g.points[i] = t0 + h * i;
        g.points.back() = t1;
        return g;
    }

    int n_slices() const { return static_cast<int>(points.size()) - 1; }
    double duration(int slice) const { return points[slice + 1] - points[slice]; }
    double total() const { return points.back() - points.front(); }

    void validate() const {
        if (points.empty()) throw std::invalid_argument("TimeGrid: empty grid");
        for (std::size_t i = 1; i < points.size(); ++i)
            if (!(points[i] > points[i - 1]))
                throw std::invalid_argument("TimeGrid: points must be strictly increasing");
    }
};

// LP: left point, MP: midpoint, LG2/LG4: two/three-point Lie-group rules.
enum class Rule { LP, MP, LG2, LG4 };

inline const char* rule_name(Rule r) {
    switch (r) {
        case Rule::LP: return "LP";
        case Rule::MP: return "MP";
        case Rule::LG2: return "LG2";
        case Rule::LG4: return "LG4";
    }
    return "?";
}

using Sampler = std::function<Matrix(double)>;
using StateSampler = std::function<Matrix(double, const Vector&)>;

namespace detail {

inline Vector one_point_step(const Matrix& gen, double dt, const Vector& state) {
    const int nsteps = substeps_for(norm1(gen), dt);
    return expm_action(matrix_apply(gen), state, dt, nsteps);
}

inline Vector two_point_step(const Matrix& left, const Matrix& right, double dt,
                             const Vector& state) {
    // 1-norm upper bound of the assembled generator sizes the substeps
    // (|[L,R]|_1 <= 2|L|_1|R|_1), keeping the whole step free of
    // matrix-matrix products; the kernel itself is matrix-free.
    const double nl = norm1(left), nr = norm1(right);
    const double bound = 0.5 * (nl + nr) + std::abs(dt) * nl * nr / 3.0;
    const int nsteps = substeps_for(bound, dt);
    return expm_action_twopoint(matrix_apply(left), matrix_apply(right), state, dt, nsteps);
}

inline Vector three_point_step(const Matrix& left, const Matrix& mid, const Matrix& right,
                               double dt, const Vector& state) {
    const double nl = norm1(left), nr = norm1(right);
    const double bound =
        (nl + 4.0 * norm1(mid) + nr) / 6.0 + std::abs(dt) * nl * nr / 6.0;
    const int nsteps = substeps_for(bound, dt);
    return expm_action_threepoint(matrix_apply(left), matrix_apply(mid), matrix_apply(right),
                                  state, dt, nsteps);
}

// Effective slice generator for the dense (isospectral) path.
inline Matrix effective_generator(Rule rule, const Matrix* left, const Matrix* mid,
                                  const Matrix* right, double dt) {
    switch (rule) {
        case Rule::LP: return *left;
        case Rule::MP: return *mid;
        case Rule::LG2:
            return 0.5 * (*left + *right) + Complex(0.0, dt / 6.0) * commutator(*left, *right);
        case Rule::LG4:
            return (*left + 4.0 * (*mid) + *right) / 6.0 +
                   Complex(0.0, dt / 12.0) * commutator(*left, *right);
    }
    throw std::logic_error("effective_generator: unknown rule");
}

inline void check_step_interval(double t_left, double t_right, const char* who) {
    if (!(t_right > t_left))
        throw std::invalid_argument(std::string(who) + ": t_right must exceed t_left");
}

} // namespace detail

/// One slice of the selected rule with a time-dependent sampler.
inline Vector step(Rule rule, const Sampler& sampler, double t_left, double t_right,
                   const Vector& state) {
    detail::check_step_interval(t_left, t_right, "step");
    const double dt = t_right - t_left;
    switch (rule) {
        case Rule::LP: return detail::one_point_step(sampler(t_left), dt, state);
        case Rule::MP: return detail::one_point_step(sampler(0.5 * (t_left + t_right)), dt, state);
        case Rule::LG2:
            return detail::two_point_step(sampler(t_left), sampler(t_right), dt, state);
        case Rule::LG4:
            return detail::three_point_step(sampler(t_left), sampler(0.5 * (t_left + t_right)),
                                            sampler(t_right), dt, state);
    }
    throw std::logic_error("step: unknown rule");
}

/// Second-order scheme for state-dependent generators: estimate the
/// generator at the midpoint from a half-step, then take the full step from
/// the left state under the midpoint estimate.
inline Vector step_state_dependent_lg2(const StateSampler& sampler, double t_left,
                                       double t_right, const Vector& state) {
    detail::check_step_interval(t_left, t_right, "step_state_dependent_lg2");
    const double dt = t_right - t_left;
    const Matrix gen_left = sampler(t_left, state);
    const Vector mid_state = detail::one_point_step(gen_left, 0.5 * dt, state);
    const Matrix gen_mid = sampler(0.5 * (t_left + t_right), mid_state);
    return detail::one_point_step(gen_mid, dt, state);
}

/// Fourth-order variant. The LG2 stages supply first estimates of the
/// midpoint and right-edge generators; two fixed-point sweeps then re-sample
/// both through the three-point propagator itself (with the quarter-point
/// generator taken from the quadratic through the three current samples).
/// A single sweep leaves a second-order leak from the midpoint state
/// estimate; two sweeps push the sample errors below the quadrature error
/// and restore the full fourth order of the underlying rule.
inline Vector step_state_dependent_lg4(const StateSampler& sampler, double t_left,
                                       double t_right, const Vector& state) {
    detail::check_step_interval(t_left, t_right, "step_state_dependent_lg4");
    const double dt = t_right - t_left;
    const double t_mid = 0.5 * (t_left + t_right);

    const Matrix gen_left = sampler(t_left, state);
    const Vector mid_estimate = detail::one_point_step(gen_left, 0.5 * dt, state);
    Matrix gen_mid = sampler(t_mid, mid_estimate);
    const Vector right_estimate = detail::one_point_step(gen_mid, dt, state);
    Matrix gen_right = sampler(t_right, right_estimate);

    for (int sweep = 0; sweep < 2; ++sweep) {
        // quarter-point value of the quadratic through (left, mid, right)
        const Matrix gen_quarter =
            0.375 * gen_left + 0.75 * gen_mid - 0.125 * gen_right;
        const Vector mid_state =
            detail::three_point_step(gen_left, gen_quarter, gen_mid, 0.5 * dt, state);
        gen_mid = sampler(t_mid, mid_state);
        const Vector right_state =
            detail::three_point_step(gen_left, gen_mid, gen_right, dt, state);
        gen_right = sampler(t_right, right_state);
    }
    return detail::three_point_step(gen_left, gen_mid, gen_right, dt, state);
}

/// Full trajectory including both endpoints. For the LG rules the right-edge
/// generator of each slice is re-used as the left edge of the next one.
inline std::vector<Vector> propagate(Rule rule, const Sampler& sampler, const TimeGrid& grid,
                                     const Vector& initial) {
    grid.validate();
    std::vector<Vector> trajectory;
    trajectory.reserve(grid.points.size());
    trajectory.push_back(initial);

    std::optional<Matrix> edge; // cached right-edge sample for LG rules
    for (int n = 0; n < grid.n_slices(); ++n) {
        const double t_left = grid.points[n];
        const double t_right = grid.points[n + 1];
        const double dt = t_right - t_left;
        const Vector& state = trajectory.back();
        switch (rule) {
            case Rule::LP:
                trajectory.push_back(detail::one_point_step(sampler(t_left), dt, state));
                break;
            case Rule::MP:
                trajectory.push_back(
                    detail::one_point_step(sampler(0.5 * (t_left + t_right)), dt, state));
                break;
            case Rule::LG2: {
                Matrix left = edge ? std::move(*edge) : sampler(t_left);
                Matrix right = sampler(t_right);
                trajectory.push_back(detail::two_point_step(left, right, dt, state));
                edge = std::move(right);
                break;
            }
            case Rule::LG4: {
                Matrix left = edge ? std::move(*edge) : sampler(t_left);
                Matrix mid = sampler(0.5 * (t_left + t_right));
                Matrix right = sampler(t_right);
                trajectory.push_back(detail::three_point_step(left, mid, right, dt, state));
                edge = std::move(right);
                break;
            }
        }
    }
    return trajectory;
}

// State-dependent rules: LP freezes the left-state generator over the slice.
enum class StateRule { LP, LG2, LG4 };

inline const char* rule_name(StateRule r) {
    switch (r) {
        case StateRule::LP: return "LP";
        case StateRule::LG2: return "LG2";
        case StateRule::LG4: return "LG4";
    }
    return "?";
}

inline std::vector<Vector> propagate_state_dependent(StateRule rule, const StateSampler& sampler,
                                                     const TimeGrid& grid, const Vector& initial) {
    grid.validate();
    std::vector<Vector> trajectory;
    trajectory.reserve(grid.points.size());
    trajectory.push_back(initial);
    for (int n = 0; n < grid.n_slices(); ++n) {
        const double t_left = grid.points[n];
        const double t_right = grid.points[n + 1];
        const Vector& state = trajectory.back();
        switch (rule) {
            case StateRule::LP:
                trajectory.push_back(detail::one_point_step(sampler(t_left, state),
                                                            t_right - t_left, state));
                break;
            case StateRule::LG2:
                trajectory.push_back(step_state_dependent_lg2(sampler, t_left, t_right, state));
                break;
            case StateRule::LG4:
                trajectory.push_back(step_state_dependent_lg4(sampler, t_left, t_right, state));
                break;
        }
    }
    return trajectory;
}

/// Two-sided propagation rho <- P rho P^dagger with P built from the selected
/// rule; the sampler must return Hermitian Hamiltonians, which keeps the flow
/// isospectral (Hermiticity and trace preserved).
inline Matrix propagate_isospectral(Rule rule, const Sampler& sampler, const TimeGrid& grid,
                                    Matrix rho) {
    grid.validate();
    require_square_finite(rho, "propagate_isospectral");

    auto sample_checked = [&](double t) {
        Matrix h = sampler(t);
        if (!is_hermitian(h))
            throw std::invalid_argument(
                "propagate_isospectral: sampler returned a non-Hermitian Hamiltonian");
        return h;
    };

    std::optional<Matrix> edge;
    for (int n = 0; n < grid.n_slices(); ++n) {
        const double t_left = grid.points[n];
        const double t_right = grid.points[n + 1];
        const double dt = t_right - t_left;
        Matrix left, mid, right;
        switch (rule) {
            case Rule::LP: left = sample_checked(t_left); break;
            case Rule::MP: mid = sample_checked(0.5 * (t_left + t_right)); break;
            case Rule::LG2:
                left = edge ? std::move(*edge) : sample_checked(t_left);
                right = sample_checked(t_right);
                break;
            case Rule::LG4:
                left = edge ? std::move(*edge) : sample_checked(t_left);
                mid = sample_checked(0.5 * (t_left + t_right));
                right = sample_checked(t_right);
                break;
        }
        const Matrix gen = detail::effective_generator(rule, &left, &mid, &right, dt);
        const Matrix prop = expm(Complex(0.0, -dt) * gen);
        rho = prop * rho * prop.adjoint();
        if (rule == Rule::LG2 || rule == Rule::LG4) edge = std::move(right);
    }
    return rho;
}

namespace detail {

inline double fit_loglog_slope(const std::vector<double>& counts,
                               const std::vector<double>& errors) {
    // Least squares on log(error) vs log(count), restricted by the caller to
    // the pre-roundoff regime.
    const std::size_t n = counts.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(counts[i]);
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / denom;
}

constexpr double roundoff_floor = 1e-11;

template <class PropagateFinal>
double estimate_order_impl(double total_time, std::vector<int> counts,
                           PropagateFinal&& final_state) {
    if (counts.size() < 4)
        throw std::invalid_argument("estimate_order: need at least 4 slice counts");
    std::sort(counts.begin(), counts.end());
    if (counts.front() < 1)
        throw std::invalid_argument("estimate_order: slice counts must be positive");
    if (counts.back() < 10 * counts.front())
        throw std::invalid_argument("estimate_order: slice counts must span at least one decade");
    if (!(total_time > 0))
        throw std::invalid_argument("estimate_order: total time must be positive");

    const Vector reference = final_state(32 * counts.back(), true);
    const double ref_norm = reference.norm();

    std::vector<double> xs, ys;
    for (int count : counts) {
        const Vector endpoint = final_state(count, false);
        const double err = (endpoint - reference).norm() / ref_norm;
        if (err > roundoff_floor) {
            xs.push_back(static_cast<double>(count));
            ys.push_back(err);
        }
    }
    if (xs.size() < 2)
        throw std::runtime_error("estimate_order: cannot estimate order "
                                 "(all errors at roundoff floor)");
    return fit_loglog_slope(xs, ys);
}

} // namespace detail

/// Least-squares slope of log(final-state error) vs log(slice count). The
/// reference solution is the three-point rule at 32x the largest requested
/// count; errors at the roundoff floor are excluded from the fit. A rule of
/// order p yields a slope near -p.
inline double estimate_order(Rule rule, const Sampler& sampler, double total_time,
                             const std::vector<int>& counts, const Vector& initial) {
    return detail::estimate_order_impl(
        total_time, counts, [&](int count, bool is_reference) {
            const Rule r = is_reference ? Rule::LG4 : rule;
            return propagate(r, sampler, TimeGrid::uniform(0.0, total_time, count), initial)
                .back();
        });
}

inline double estimate_order_state_dependent(StateRule rule, const StateSampler& sampler,
                                             double total_time, const std::vector<int>& counts,
                                             const Vector& initial) {
    return detail::estimate_order_impl(
        total_time, counts, [&](int count, bool is_reference) {
            const StateRule r = is_reference ? StateRule::LG4 : rule;
            return propagate_state_dependent(r, sampler,
                                             TimeGrid::uniform(0.0, total_time, count), initial)
                .back();
        });
}

} // namespace liepulse
