#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

// Limited-memory quasi-Newton descent with a strong-Wolfe line search,
// coordinate freezing, and amplitude bounds by projection. GRAPE objectives
// are fed in as 1 - fidelity.

namespace liepulse {

struct OptimizerConfig {
    int memory = 10;                  // stored curvature pairs; 0 = steepest descent
    int max_iterations = 200;
    double gradient_tol = 1e-8;       // 2-norm of the free-coordinate gradient
    double sufficient_decrease = 1e-4; // Wolfe c1
    double curvature = 0.9;            // Wolfe c2
    double c_max = 0.0;                // amplitude bound, <= 0 disables
    std::uint64_t seed = 0;            // carried for reproducible initial guesses
    Eigen::Array<bool, Eigen::Dynamic, 1> frozen; // empty = none
    bool check_gradient = false;       // finite-difference audit at x0

    void validate() const {
        if (memory < 0) throw std::invalid_argument("OptimizerConfig: memory must be >= 0");
        if (!(sufficient_decrease > 0 && sufficient_decrease < curvature && curvature < 1))
            throw std::invalid_argument(
                "OptimizerConfig: need 0 < sufficient_decrease < curvature < 1");
    }
};

// Objective fills the gradient and returns the value.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct OptimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    std::vector<double> history; // accepted objective values, starting at x0
    std::string status;          // converged | max_iterations | line_search_failed | stalled
    int iterations = 0;
    int evaluations = 0;
};

namespace detail {

struct MaskedObjective {
    const Objective& fn;
    const Eigen::Array<bool, Eigen::Dynamic, 1>& frozen;
    int* evaluations;

    double operator()(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
        const double value = fn(x, grad);
        ++(*evaluations);
        if (frozen.size() != 0)
            for (Eigen::Index i = 0; i < grad.size(); ++i)
                if (frozen[i]) grad[i] = 0.0;
        return value;
    }
};

// Strong Wolfe line search (bracket + zoom). Returns the accepted step, or 0
// on failure; on success x/f/g hold the new point.
template <class Eval>
double wolfe_line_search(const Eval& eval, const Eigen::VectorXd& x0, double f0,
                         const Eigen::VectorXd& g0, const Eigen::VectorXd& d, double c1,
                         double c2, Eigen::VectorXd& x, double& f, Eigen::VectorXd& g) {
    const double dg0 = g0.dot(d);
    if (dg0 >= 0) return 0.0;
    const int max_evals = 50;
    const double alpha_max = 1e8;

    auto phi = [&](double alpha, double& dphi) {
        x = x0 + alpha * d;
        f = eval(x, g);
        dphi = g.dot(d);
        return f;
    };

    auto zoom = [&](double lo, double f_lo, double dphi_lo, double hi, double f_hi) -> double {
        for (int it = 0; it < max_evals; ++it) {
            // quadratic interpolation off the low end, safeguarded to the middle
            double alpha = lo - 0.5 * dphi_lo * (hi - lo) * (hi - lo) /
                                    (f_hi - f_lo - dphi_lo * (hi - lo));
            const double span = hi - lo;
            if (!std::isfinite(alpha) || alpha <= std::min(lo, hi) + 0.1 * std::abs(span) ||
                alpha >= std::max(lo, hi) - 0.1 * std::abs(span))
                alpha = 0.5 * (lo + hi);
            double dphi_a = 0.0;
            const double f_a = phi(alpha, dphi_a);
            if (f_a > f0 + c1 * alpha * dg0 || f_a >= f_lo) {
                hi = alpha;
                f_hi = f_a;
            } else {
                if (std::abs(dphi_a) <= -c2 * dg0) return alpha;
                if (dphi_a * (hi - lo) >= 0) {
                    hi = lo;
                    f_hi = f_lo;
                }
                lo = alpha;
                f_lo = f_a;
                dphi_lo = dphi_a;
            }
            if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
        }
        return 0.0;
    };

    double alpha_prev = 0.0, f_prev = f0, dphi_prev = dg0;
    double alpha = 1.0;
    for (int it = 0; it < max_evals; ++it) {
        double dphi = 0.0;
        const double f_a = phi(alpha, dphi);
        if (f_a > f0 + c1 * alpha * dg0 || (it > 0 && f_a >= f_prev))
            return zoom(alpha_prev, f_prev, dphi_prev, alpha, f_a);
        if (std::abs(dphi) <= -c2 * dg0) return alpha;
        if (dphi >= 0) return zoom(alpha, f_a, dphi, alpha_prev, f_prev);
        alpha_prev = alpha;
        f_prev = f_a;
        dphi_prev = dphi;
        alpha = std::min(2.0 * alpha, alpha_max);
        if (alpha >= alpha_max) return 0.0;
    }
    return 0.0;
}

} // namespace detail

/// Two-loop-recursion L-BFGS minimization with strong-Wolfe steps. Frozen
/// coordinates never move; when c_max > 0 accepted iterates are clipped to
/// [-c_max, c_max] and kept only if they do not increase the objective,
/// falling back to a projected backtracking step otherwise.
inline OptimizeResult minimize(const Objective& objective, Eigen::VectorXd x0,
                               const OptimizerConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = x0.size();
    if (cfg.frozen.size() != 0 && cfg.frozen.size() != n)
        throw std::invalid_argument("minimize: frozen mask length mismatch");

    OptimizeResult result;
    detail::MaskedObjective eval{objective, cfg.frozen, &result.evaluations};

    auto project = [&](Eigen::VectorXd& x) {
        if (cfg.c_max > 0)
            for (Eigen::Index i = 0; i < n; ++i) {
                if (cfg.frozen.size() != 0 && cfg.frozen[i]) continue;
                x[i] = std::clamp(x[i], -cfg.c_max, cfg.c_max);
            }
        if (cfg.frozen.size() != 0)
            for (Eigen::Index i = 0; i < n; ++i)
                if (cfg.frozen[i]) x[i] = x0[i];
    };

    Eigen::VectorXd x = x0;
    project(x);
    Eigen::VectorXd g(n);
    double f = eval(x, g);

    if (cfg.check_gradient) {
        // one-shot audit against central differences
        Eigen::VectorXd probe = g, dummy(n);
        const double h = 1e-6 * std::max(1.0, x.norm());
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::VectorXd xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            probe[i] = (objective(xp, dummy) - objective(xm, dummy)) / (2 * h);
            if (cfg.frozen.size() != 0 && cfg.frozen[i]) probe[i] = g[i];
        }
        if ((probe - g).norm() > 1e-3 * std::max(1.0, g.norm()))
            throw std::runtime_error("minimize: analytic gradient failed the debug audit");
    }

    result.history.push_back(f);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    Eigen::VectorXd best_x = x;
    double best_f = f;
    result.status = "max_iterations";

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (g.norm() <= cfg.gradient_tol) {
            result.status = "converged";
            break;
        }

        // two-loop recursion
        Eigen::VectorXd d = -g;
        if (!s_hist.empty()) {
            std::vector<double> alpha(s_hist.size());
            for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
                alpha[i] = rho_hist[i] * s_hist[i].dot(d);
                d -= alpha[i] * y_hist[i];
            }
            const double gamma = s_hist.back().dot(y_hist.back()) /
                                 y_hist.back().squaredNorm();
            d *= gamma;
            for (std::size_t i = 0; i < s_hist.size(); ++i) {
                const double beta = rho_hist[i] * y_hist[i].dot(d);
                d += (alpha[i] - beta) * s_hist[i];
            }
        }
        if (d.dot(g) >= 0) d = -g; // safeguard: not a descent direction

        Eigen::VectorXd x_new(n), g_new(n);
        double f_new = f;
        const double step = detail::wolfe_line_search(eval, x, f, g, d,
                                                      cfg.sufficient_decrease, cfg.curvature,
                                                      x_new, f_new, g_new);
        if (step == 0.0) {
            result.status = "line_search_failed";
            break;
        }

        bool clipped = false;
        if (cfg.c_max > 0) {
            Eigen::VectorXd projected = x_new;
            project(projected);
            if (projected != x_new) {
                clipped = true;
                x_new = std::move(projected);
                f_new = eval(x_new, g_new);
                if (f_new > f) {
                    // projected backtracking along the negative gradient
                    bool improved = false;
                    double t = step;
                    for (int bt = 0; bt < 30; ++bt) {
                        Eigen::VectorXd x_try = x - t * g;
                        project(x_try);
                        const double f_try = eval(x_try, g_new);
                        if (f_try < f) {
                            x_new = std::move(x_try);
                            f_new = f_try;
                            improved = true;
                            break;
                        }
                        t *= 0.5;
                    }
                    if (!improved) {
                        result.status = "stalled";
                        break;
                    }
                }
            }
        }

        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd y = g_new - g;
        x = std::move(x_new);
        f = f_new;
        g = g_new;
        result.history.push_back(f);
        ++result.iterations;
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }

        if (cfg.memory > 0 && !clipped) {
            const double sy = s.dot(y);
            if (sy > 1e-10 * s.norm() * y.norm()) {
                s_hist.push_back(std::move(s));
                y_hist.push_back(std::move(y));
                rho_hist.push_back(1.0 / sy);
                if (static_cast<int>(s_hist.size()) > cfg.memory) {
                    s_hist.pop_front();
                    y_hist.pop_front();
                    rho_hist.pop_front();
                }
            }
        } else if (clipped) {
            // curvature pairs straddling a projection are unreliable
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        if (iter + 1 == cfg.max_iterations) result.status = "max_iterations";
    }

    if (g.norm() <= cfg.gradient_tol) result.status = "converged";
    result.x = f <= best_f ? x : best_x;
    result.value = std::min(f, best_f);
    return result;
}

/// Deterministic random initial guess: uniform in [-c_max/10, c_max/10] per
/// coefficient, drawn channel-major from a seeded generator; frozen points
/// are set to zero. The uniform variates come straight from the generator
/// bits so the stream is identical across platforms.
inline Eigen::MatrixXd random_guess(int channels, int points, double c_max, std::uint64_t seed,
                                    const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>&
                                        freeze = {}) {
    if (channels < 1 || points < 0)
        throw std::invalid_argument("random_guess: bad shape");
    if (freeze.size() != 0 && (freeze.rows() != channels || freeze.cols() != points))
        throw std::invalid_argument("random_guess: freeze mask shape mismatch");
    std::mt19937_64 rng(seed);
    auto uniform01 = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };
    Eigen::MatrixXd out(channels, points);
    const double scale = c_max / 10.0;
    for (int k = 0; k < channels; ++k)
        for (int p = 0; p < points; ++p) {
            const double u = 2.0 * uniform01() - 1.0;
            out(k, p) = (freeze.size() != 0 && freeze(k, p)) ? 0.0 : scale * u;
        }
    return out;
}

} // namespace liepulse
