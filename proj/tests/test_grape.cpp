#include "liepulse/grape.hpp"

#include "liepulse/gradcheck.hpp"
#include "liepulse/spin.hpp"
#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace liepulse;

namespace {

// single spin-1/2 Liouville-space problem with Sx/Sy controls
ControlProblem single_spin_problem(double offset, int n_slices, double total_time,
                                   Parameterization param) {
    const SpinOperators ops = spin_operators(Spin::Half);
    ControlProblem p;
    p.drift = liouvillian(Matrix(offset * ops.sz));
    p.controls = {liouvillian(ops.sx), liouvillian(ops.sy)};
    p.rho0 = vec(ops.sz).normalized();
    p.delta = vec(ops.sx).normalized();
    p.sequence.grid = TimeGrid::uniform(0.0, total_time, n_slices);
    p.sequence.parameterization = param;
    p.sequence.coefficients =
        Eigen::MatrixXd::Zero(2, param == Parameterization::PWC ? n_slices : n_slices + 1);
    return p;
}

} // namespace

TEST_CASE("fidelity_pwc") {
    SECTION("zero-duration grid returns the bare overlap") {
        ControlProblem p = single_spin_problem(1.0, 1, 0.5, Parameterization::PWC);
        p.sequence.grid.points = {0.0};
        p.sequence.coefficients.resize(2, 0);
        const FidelityReport r = fidelity_pwc(p);
        REQUIRE(r.f == Catch::Approx(p.delta.dot(p.rho0).real()).margin(1e-15));
        REQUIRE(r.grad_c.cols() == 0);
    }
    SECTION("stationary flat point: delta = rho0, zero drift and controls") {
        ControlProblem p = single_spin_problem(0.0, 4, 1.0, Parameterization::PWC);
        p.delta = p.rho0;
        const FidelityReport r = fidelity_pwc(p);
        REQUIRE(r.f == Catch::Approx(1.0));
        REQUIRE(r.grad_c.cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("two-spin gradient matches central finite differences") {
        auto g = test::rng(301);
        SpinChainSpec spec;
        spec.n_spins = 2;
        spec.offsets = {1.3, -0.8};
        spec.couplings = {0.6};
        const ChainOperators chain = chain_hamiltonian(spec);
        ControlProblem p;
        p.drift = liouvillian(chain.drift);
        p.controls = {liouvillian(chain.controls[0]), liouvillian(chain.controls[1])};
        p.rho0 = test::random_state(g, 16);
        p.delta = test::random_state(g, 16);
        p.sequence.grid = TimeGrid::uniform(0.0, 1.2, 5);
        p.sequence.parameterization = Parameterization::PWC;
        p.sequence.coefficients = Eigen::MatrixXd::Zero(2, 5);
        for (int k = 0; k < 2; ++k)
            for (int n = 0; n < 5; ++n) p.sequence.coefficients(k, n) = test::uniform(g);
        REQUIRE(check_control_gradient(p) < 1e-6);
    }
}

TEST_CASE("fidelity_pwl") {
    SECTION("constant sequence equals the equivalent PWC fidelity") {
        auto g = test::rng(302);
        ControlProblem pwl = random_control_problem(4242, Parameterization::PWL);
        const int n = pwl.sequence.grid.n_slices();
        for (int k = 0; k < 2; ++k) {
            const double c = test::uniform(g);
            pwl.sequence.coefficients.row(k).setConstant(c);
        }
        ControlProblem pwc = pwl;
        pwc.sequence.parameterization = Parameterization::PWC;
        pwc.sequence.coefficients = pwl.sequence.coefficients.leftCols(n);
        REQUIRE(std::abs(fidelity_pwl(pwl).f - fidelity_pwc(pwc).f) < 1e-12);
    }
    SECTION("gradient matches central finite differences at every node") {
        for (std::uint64_t seed : {11u, 12u, 13u}) {
            const ControlProblem p = random_control_problem(seed, Parameterization::PWL);
            REQUIRE(check_control_gradient(p) < 1e-6);
        }
    }
    SECTION("commuting controls: node gradient is the mean of adjacent slice gradients") {
        // single channel, zero drift: every generator is proportional to the
        // same control operator, all commutators vanish
        auto g = test::rng(303);
        const SpinOperators ops = spin_operators(Spin::Half);
        const int n_slices = 4;
        ControlProblem pwl;
        pwl.drift = Matrix::Zero(4, 4);
        pwl.controls = {liouvillian(ops.sx)};
        pwl.rho0 = vec(ops.sz).normalized();
        pwl.delta = vec(ops.sy).normalized();
        pwl.sequence.grid = TimeGrid::uniform(0.0, 1.0, n_slices);
        pwl.sequence.parameterization = Parameterization::PWL;
        pwl.sequence.coefficients.resize(1, n_slices + 1);
        pwl.sequence.coefficients.setConstant(0.9 + 0.1 * test::uniform(g));

        ControlProblem pwc = pwl;
        pwc.sequence.parameterization = Parameterization::PWC;
        pwc.sequence.coefficients = pwl.sequence.coefficients.leftCols(n_slices);

        const Eigen::MatrixXd g_pwl = fidelity_pwl(pwl).grad_c;
        const Eigen::MatrixXd g_pwc = fidelity_pwc(pwc).grad_c;
        for (int j = 1; j < n_slices; ++j)
            REQUIRE(g_pwl(0, j) ==
                    Catch::Approx(0.5 * (g_pwc(0, j - 1) + g_pwc(0, j))).margin(1e-12));
        REQUIRE(g_pwl(0, 0) == Catch::Approx(0.5 * g_pwc(0, 0)).margin(1e-12));
        REQUIRE(g_pwl(0, n_slices) ==
                Catch::Approx(0.5 * g_pwc(0, n_slices - 1)).margin(1e-12));
    }
}

TEST_CASE("slice duration gradients") {
    SECTION("zero generator on a slice zeroes that component (PWC)") {
        ControlProblem p = single_spin_problem(0.0, 3, 1.0, Parameterization::PWC);
        const Eigen::VectorXd grad = slice_duration_gradient_pwc(p);
        REQUIRE(grad.cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("finite differences agree for PWC and PWL") {
        for (std::uint64_t seed : {21u, 22u, 23u}) {
            REQUIRE(check_duration_gradient(
                        random_control_problem(seed, Parameterization::PWC)) < 1e-6);
            REQUIRE(check_duration_gradient(
                        random_control_problem(seed, Parameterization::PWL)) < 1e-6);
        }
    }
    SECTION("uniform scaling identity: sum tau_n df/dtau_n = df/ds at s = 1") {
        const ControlProblem p = random_control_problem(31, Parameterization::PWC);
        const Eigen::VectorXd grad = slice_duration_gradient_pwc(p);
        const int n = p.sequence.grid.n_slices();
        double lhs = 0;
        for (int s = 0; s < n; ++s) lhs += p.sequence.grid.duration(s) * grad[s];

        auto value_scaled = [&](double scale) {
            ControlProblem q = p;
            for (int s = 0; s < n; ++s)
                q.sequence.grid.points[s + 1] =
                    q.sequence.grid.points[s] + scale * p.sequence.grid.duration(s);
            return fidelity_pwc(q).f;
        };
        const double h = 1e-6;
        const double rhs = (value_scaled(1 + h) - value_scaled(1 - h)) / (2 * h);
        REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-6).margin(1e-9));
    }
    SECTION("commuting edges reduce the PWL gradient to the PWC expression") {
        ControlProblem pwl = random_control_problem(41, Parameterization::PWL);
        pwl.sequence.coefficients.col(0).setConstant(0.4);
        for (int j = 1; j <= pwl.sequence.grid.n_slices(); ++j)
            pwl.sequence.coefficients.col(j) = pwl.sequence.coefficients.col(0);
        ControlProblem pwc = pwl;
        pwc.sequence.parameterization = Parameterization::PWC;
        pwc.sequence.coefficients =
            pwl.sequence.coefficients.leftCols(pwl.sequence.grid.n_slices());
        const Eigen::VectorXd g_pwl = slice_duration_gradient_pwl(pwl);
        const Eigen::VectorXd g_pwc = slice_duration_gradient_pwc(pwc);
        REQUIRE((g_pwl - g_pwc).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("waveform basis") {
    SECTION("identity basis is a no-op for projection and congruence") {
        WaveformBasis w{Eigen::MatrixXd::Identity(5, 5)};
        Eigen::MatrixXd grad(2, 5);
        grad.setRandom();
        REQUIRE((basis_project(grad, w) - grad).norm() < 1e-14);
        Eigen::MatrixXd h(10, 10);
        h.setRandom();
        h = (h + h.transpose()).eval();
        REQUIRE((basis_congruence(h, 2, w) - h).norm() < 1e-14);
    }
    SECTION("single column gives the scalar projection") {
        Eigen::VectorXd col(4);
        col << 0.5, 0.5, 0.5, 0.5;
        WaveformBasis w{col};
        Eigen::MatrixXd grad(1, 4);
        grad << 1, 2, 3, 4;
        const Eigen::MatrixXd a = basis_project(grad, w);
        REQUIRE(a.rows() == 1);
        REQUIRE(a.cols() == 1);
        REQUIRE(a(0, 0) == Catch::Approx(5.0));
    }
    SECTION("congruence matches the explicit double sum") {
        auto g = test::rng(305);
        const int n = 6, m = 3, channels = 2;
        Eigen::MatrixXd raw(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) raw(i, j) = test::uniform(g);
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(raw)
                                      .householderQ() *
                                  Eigen::MatrixXd::Identity(n, m);
        WaveformBasis w{q};
        Eigen::MatrixXd h(channels * n, channels * n);
        for (int i = 0; i < h.rows(); ++i)
            for (int j = 0; j <= i; ++j) h(i, j) = h(j, i) = test::uniform(g);
        const Eigen::MatrixXd got = basis_congruence(h, channels, w);
        for (int k = 0; k < channels; ++k)
            for (int kp = 0; kp < channels; ++kp)
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b) {
                        double want = 0;
                        for (int i = 0; i < n; ++i)
                            for (int j = 0; j < n; ++j)
                                want += q(i, a) * q(j, b) * h(k * n + i, kp * n + j);
                        REQUIRE(got(k * m + a, kp * m + b) == Catch::Approx(want).margin(1e-12));
                    }
    }
    SECTION("basis-space gradient matches finite differences through the pipeline") {
        auto g = test::rng(306);
        const ControlProblem base = random_control_problem(51, Parameterization::PWC);
        const int n = base.sequence.points();
        const int m = std::max(1, n - 2);
        Eigen::MatrixXd raw(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) raw(i, j) = test::uniform(g);
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(raw)
                                      .householderQ() *
                                  Eigen::MatrixXd::Identity(n, m);
        WaveformBasis w{q};

        Eigen::MatrixXd alpha(2, m);
        for (int k = 0; k < 2; ++k)
            for (int j = 0; j < m; ++j) alpha(k, j) = test::uniform(g);

        auto value_at = [&](const Eigen::MatrixXd& al) {
            ControlProblem p = base;
            p.sequence.coefficients = al * q.transpose(); // c = W alpha per channel row
            return fidelity_pwc(p).f;
        };
        ControlProblem p = base;
        p.sequence.coefficients = alpha * q.transpose();
        const Eigen::MatrixXd grad_alpha = basis_project(fidelity_pwc(p).grad_c, w);

        const double h = 1e-6;
        for (int k = 0; k < 2; ++k)
            for (int j = 0; j < m; ++j) {
                Eigen::MatrixXd ap = alpha, am = alpha;
                ap(k, j) += h;
                am(k, j) -= h;
                const double fd = (value_at(ap) - value_at(am)) / (2 * h);
                REQUIRE(grad_alpha(k, j) == Catch::Approx(fd).epsilon(1e-6).margin(1e-9));
            }
    }
    SECTION("non-orthonormal basis is rejected") {
        Eigen::MatrixXd w(3, 2);
        w << 1, 1, 0, 1, 0, 0;
        REQUIRE_THROWS_AS(basis_project(Eigen::MatrixXd::Zero(1, 3), WaveformBasis{w}),
                          std::invalid_argument);
    }
}

TEST_CASE("ensemble_fidelity") {
    const ControlProblem base = single_spin_problem(1.0, 4, 1.0, Parameterization::PWC);
    ControlProblem p = base;
    auto g = test::rng(307);
    for (int k = 0; k < 2; ++k)
        for (int n = 0; n < 4; ++n) p.sequence.coefficients(k, n) = test::uniform(g);

    SECTION("single member with weight 1 reproduces the member report") {
        const FidelityReport member = fidelity_pwc(p);
        const FidelityReport ens = ensemble_fidelity({{1.0, p}});
        REQUIRE(ens.f == member.f);
        REQUIRE((ens.grad_c - member.grad_c).norm() == 0.0);
    }
    SECTION("duplicated member with half weights is the same report") {
        const FidelityReport one = ensemble_fidelity({{1.0, p}});
        const FidelityReport two = ensemble_fidelity({{0.5, p}, {0.5, p}});
        REQUIRE(two.f == Catch::Approx(one.f).margin(1e-15));
        REQUIRE((two.grad_c - one.grad_c).norm() < 1e-15);
    }
    SECTION("distinct offsets average member-wise") {
        ControlProblem p2 = p;
        p2.drift = liouvillian(Matrix(2.5 * spin_operators(Spin::Half).sz));
        const FidelityReport r1 = fidelity_pwc(p);
        const FidelityReport r2 = fidelity_pwc(p2);
        const FidelityReport ens = ensemble_fidelity({{0.3, p}, {0.7, p2}});
        REQUIRE(ens.f == Catch::Approx(0.3 * r1.f + 0.7 * r2.f).margin(1e-14));
        REQUIRE((ens.grad_c - (0.3 * r1.grad_c + 0.7 * r2.grad_c)).norm() < 1e-13);
    }
    SECTION("parallel evaluation is deterministic") {
        std::vector<WeightedProblem> members;
        for (int i = 0; i < 7; ++i) {
            ControlProblem m = p;
            m.drift = liouvillian(Matrix((0.3 * i) * spin_operators(Spin::Half).sz));
            members.push_back({1.0 / 7, m});
        }
        const FidelityReport a = ensemble_fidelity(members, 1);
        const FidelityReport b = ensemble_fidelity(members, 2);
        REQUIRE(a.f == b.f);
        REQUIRE((a.grad_c - b.grad_c).norm() == 0.0);
    }
    SECTION("weight and shape validation") {
        REQUIRE_THROWS_AS(ensemble_fidelity({{0.4, p}, {0.4, p}}), std::invalid_argument);
        ControlProblem mismatched = p;
        mismatched.sequence.grid = TimeGrid::uniform(0, 1.0, 5);
        mismatched.sequence.coefficients = Eigen::MatrixXd::Zero(2, 5);
        REQUIRE_THROWS_AS(ensemble_fidelity({{0.5, p}, {0.5, mismatched}}),
                          std::invalid_argument);
    }
}

TEST_CASE("phase_chain_rule") {
    SECTION("zero phases pick out the quadrature gradient") {
        Eigen::VectorXd phases = Eigen::VectorXd::Zero(3);
        Eigen::VectorXd gx(3), gy(3);
        gx << 1, 2, 3;
        gy << 4, 5, 6;
        const Eigen::VectorXd gp = phase_chain_rule(2.0, phases, gx, gy);
        REQUIRE((gp - 2.0 * gy).norm() < 1e-14);
    }
    SECTION("zero gradients give zero") {
        Eigen::VectorXd phases(2), zero = Eigen::VectorXd::Zero(2);
        phases << 0.3, -1.2;
        REQUIRE(phase_chain_rule(1.5, phases, zero, zero).norm() == 0.0);
    }
    SECTION("full-pipeline finite differences") {
        for (std::uint64_t seed : {61u, 62u, 63u}) {
            const ControlProblem p = random_control_problem(seed, Parameterization::Phase);
            REQUIRE(check_control_gradient(p) < 1e-6);
        }
    }
}

TEST_CASE("grape invariants") {
    SECTION("backward-propagation identity") {
        const ControlProblem p = random_control_problem(71, Parameterization::PWC);
        const int n = p.sequence.grid.n_slices();
        Vector state = p.rho0;
        std::vector<Matrix> props;
        for (int s = 0; s < n; ++s) {
            Matrix gen = p.drift;
            for (std::size_t k = 0; k < p.controls.size(); ++k)
                gen += p.sequence.coefficients(static_cast<Eigen::Index>(k), s) * p.controls[k];
            props.push_back(expm(Complex(0, -p.sequence.grid.duration(s)) * gen));
            state = props.back() * state;
        }
        const double forward = p.delta.dot(state).real();
        Vector costate = p.delta;
        for (int s = n - 1; s >= 0; --s) costate = props[s].adjoint() * costate;
        const double backward = costate.dot(p.rho0).real();
        REQUIRE(forward == Catch::Approx(backward).margin(1e-12));
        REQUIRE(forward == Catch::Approx(fidelity_pwc(p).f).margin(1e-12));
    }
    SECTION("overlap magnitude is invariant under a global phase of delta") {
        ControlProblem p = random_control_problem(81, Parameterization::PWC);
        auto overlap_sq = [&](const ControlProblem& q) {
            ControlProblem qi = q;
            qi.delta = Complex(0, 1) * q.delta;
            const double re = fidelity_pwc(q).f;
            const double im = fidelity_pwc(qi).f;
            return re * re + im * im;
        };
        const double before = overlap_sq(p);
        ControlProblem rotated = p;
        rotated.delta = std::exp(Complex(0, 0.83)) * p.delta;
        REQUIRE(overlap_sq(rotated) == Catch::Approx(before).margin(1e-12));
        REQUIRE(std::abs(fidelity_pwc(rotated).f - fidelity_pwc(p).f) > 1e-6);
    }
    SECTION("gradient audit over random seeds") {
        const GradAuditReport report = audit_gradients(2024, 10);
        INFO("pwc " << report.pwc_controls << " pwl " << report.pwl_controls << " tau_pwc "
                    << report.pwc_durations << " tau_pwl " << report.pwl_durations << " phase "
                    << report.phase);
        REQUIRE(report.worst() < 1e-6);
    }
    SECTION("unnormalized states are rejected") {
        ControlProblem p = random_control_problem(91, Parameterization::PWC);
        p.rho0 *= 1.5;
        REQUIRE_THROWS_AS(fidelity_pwc(p), std::invalid_argument);
    }
}

TEST_CASE("fidelity_multi_target equals the per-target combination") {
    for (Parameterization param :
         {Parameterization::PWC, Parameterization::PWL, Parameterization::Phase}) {
        ControlProblem p = random_control_problem(101, param);
        auto g = test::rng(308);
        const Eigen::Index dim = p.rho0.size();
        std::vector<TransferTarget> targets;
        targets.push_back({test::random_state(g, dim), test::random_state(g, dim), 0.25});
        targets.push_back({test::random_state(g, dim), test::random_state(g, dim), 0.45});
        targets.push_back({test::random_state(g, dim), test::random_state(g, dim), 0.30});

        const FidelityReport multi = fidelity_multi_target(p, targets);
        double want_f = 0;
        Eigen::MatrixXd want_g = Eigen::MatrixXd::Zero(multi.grad_c.rows(), multi.grad_c.cols());
        for (const TransferTarget& t : targets) {
            ControlProblem q = p;
            q.rho0 = t.rho0;
            q.delta = t.delta;
            const FidelityReport r = fidelity(q);
            want_f += t.weight * r.f;
            want_g += t.weight * r.grad_c;
        }
        INFO(parameterization_name(param));
        REQUIRE(multi.f == Catch::Approx(want_f).margin(1e-13));
        REQUIRE((multi.grad_c - want_g).cwiseAbs().maxCoeff() < 1e-12);
    }
}
