#include "liepulse/integrators.hpp"

#include "liepulse/spin.hpp"
#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace liepulse;
using test::rel_err;

namespace {

Matrix sigma_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
Matrix sigma_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

// Smooth single-spin benchmark: H(t) = a*sz + b*cos(w t)*sx.
Sampler cosine_sampler(double a = 1.0, double b = 2.0, double w = 3.0) {
    return [=](double t) -> Matrix { return a * sigma_z() + b * std::cos(w * t) * sigma_x(); };
}

const std::vector<int> order_counts = {8, 16, 32, 64, 128};

} // namespace

TEST_CASE("TimeGrid") {
    const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 4);
    REQUIRE(g.n_slices() == 4);
    REQUIRE(g.duration(2) == Catch::Approx(0.25));
    REQUIRE(g.total() == Catch::Approx(1.0));

    TimeGrid bad;
    bad.points = {0.0, 0.5, 0.5};
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    REQUIRE_THROWS_AS(TimeGrid{}.validate(), std::invalid_argument);
}

TEST_CASE("step: constant and zero generators") {
    auto g = test::rng(101);
    const Matrix h = test::random_hermitian(g, 4, 1.0);
    const Vector v = test::random_state(g, 4);
    const double dt = 0.6;
    const Sampler constant = [&](double) { return h; };
    const Vector want = expm(Complex(0, -dt) * h) * v;
    for (Rule rule : {Rule::LP, Rule::MP, Rule::LG2, Rule::LG4}) {
        const Vector got = step(rule, constant, 0.0, dt, v);
        INFO(rule_name(rule));
        REQUIRE(rel_err(got, want) < 1e-12);
    }

    const Sampler zero = [](double) { return Matrix::Zero(4, 4); };
    for (Rule rule : {Rule::LP, Rule::MP, Rule::LG2, Rule::LG4})
        REQUIRE((step(rule, zero, 0.0, dt, v) - v).norm() < 1e-15);

    REQUIRE_THROWS_AS(step(Rule::LP, constant, 1.0, 1.0, v), std::invalid_argument);
}

TEST_CASE("step: rule consistency when all samples coincide") {
    auto g = test::rng(102);
    const Matrix h = test::random_hermitian(g, 6, 1.3);
    const Vector v = test::random_state(g, 6);
    const Sampler constant = [&](double) { return h; };
    const Vector lp = step(Rule::LP, constant, 0.0, 0.5, v);
    for (Rule rule : {Rule::MP, Rule::LG2, Rule::LG4})
        REQUIRE((step(rule, constant, 0.0, 0.5, v) - lp).norm() < 1e-13);
}

TEST_CASE("step: linearly varying generator error ordering over one slice") {
    auto g = test::rng(103);
    const Matrix a = test::random_hermitian(g, 2, 1.0);
    const Matrix b = test::random_hermitian(g, 2, 2.0);
    const Sampler linear = [&](double t) -> Matrix { return a + t * b; };
    Vector v(2);
    v << 1.0, 0.0;
    const double dt = 0.3;

    // fine-step left-point reference, cross-checked against the LG4 path
    const Vector ref =
        propagate(Rule::LP, linear, TimeGrid::uniform(0.0, dt, 1000000), v).back();
    const Vector ref_lg4 =
        propagate(Rule::LG4, linear, TimeGrid::uniform(0.0, dt, 64), v).back();
    REQUIRE((ref - ref_lg4).norm() < 1e-6);

    const double err_mp = (step(Rule::MP, linear, 0.0, dt, v) - ref).norm();
    const double err_lg2 = (step(Rule::LG2, linear, 0.0, dt, v) - ref).norm();
    const double err_lg4 = (step(Rule::LG4, linear, 0.0, dt, v) - ref).norm();
    REQUIRE(err_lg4 < err_lg2);
    REQUIRE(err_lg2 < err_mp);
}

TEST_CASE("state-dependent steps with inert state dependence") {
    auto g = test::rng(104);
    const Matrix h = test::random_hermitian(g, 4, 1.1);
    const Vector v = test::random_state(g, 4);
    const double dt = 0.5;

    SECTION("time-only sampler matches the midpoint rule") {
        const Sampler time_only = cosine_sampler();
        const StateSampler wrapped = [&](double t, const Vector&) { return time_only(t); };
        Vector v2(2);
        v2 << Complex(0.3, 0.1), Complex(-0.5, 0.8);
        v2.normalize();
        const Vector lg2 = step_state_dependent_lg2(wrapped, 0.1, 0.1 + dt, v2);
        const Vector mp = step(Rule::MP, time_only, 0.1, 0.1 + dt, v2);
        REQUIRE((lg2 - mp).norm() < 1e-13);
    }
    SECTION("constant sampler matches the plain exponential") {
        const StateSampler constant = [&](double, const Vector&) { return h; };
        const Vector want = expm(Complex(0, -dt) * h) * v;
        REQUIRE(rel_err(step_state_dependent_lg2(constant, 0.0, dt, v), want) < 1e-12);
        REQUIRE(rel_err(step_state_dependent_lg4(constant, 0.0, dt, v), want) < 1e-12);
    }
    SECTION("zero generator is the identity") {
        const StateSampler zero = [](double, const Vector&) { return Matrix::Zero(4, 4); };
        REQUIRE((step_state_dependent_lg2(zero, 0.0, dt, v) - v).norm() < 1e-15);
        REQUIRE((step_state_dependent_lg4(zero, 0.0, dt, v) - v).norm() < 1e-15);
    }
}

TEST_CASE("propagate: trajectory basics") {
    auto g = test::rng(105);
    const Matrix h = test::random_hermitian(g, 4, 1.0);
    const Vector v = test::random_state(g, 4);
    const Sampler constant = [&](double) { return h; };

    SECTION("single slice equals step") {
        Vector v2(2);
        v2 << 1.0, 0.0;
        const auto traj = propagate(Rule::LG4, cosine_sampler(), TimeGrid::uniform(0, 0.4, 1), v2);
        REQUIRE(traj.size() == 2);
        REQUIRE((traj.back() - step(Rule::LG4, cosine_sampler(), 0.0, 0.4, v2)).norm() < 1e-15);
    }
    SECTION("semigroup property for a constant generator") {
        const auto traj = propagate(Rule::LG2, constant, TimeGrid::uniform(0, 1.0, 2), v);
        const Vector direct = expm(Complex(0, -1.0) * h) * v;
        REQUIRE((traj.back() - direct).norm() < 1e-12);
    }
    SECTION("norm conservation under every rule") {
        Vector v2(2);
        v2 << 1.0, 0.0;
        for (Rule rule : {Rule::LP, Rule::MP, Rule::LG2, Rule::LG4}) {
            const auto traj = propagate(rule, cosine_sampler(), TimeGrid::uniform(0, 2.0, 64), v2);
            for (const Vector& state : traj)
                REQUIRE(std::abs(state.norm() - 1.0) < 1e-11);
        }
    }
}

TEST_CASE("estimate_order: empirical convergence on the smooth benchmark") {
    Vector v(2);
    v << 1.0, 0.0;
    const Sampler sampler = cosine_sampler();
    const double total = 2.0;

    const double lp = -estimate_order(Rule::LP, sampler, total, order_counts, v);
    const double mp = -estimate_order(Rule::MP, sampler, total, order_counts, v);
    const double lg2 = -estimate_order(Rule::LG2, sampler, total, order_counts, v);
    const double lg4 = -estimate_order(Rule::LG4, sampler, total, order_counts, v);
    INFO("orders: LP " << lp << " MP " << mp << " LG2 " << lg2 << " LG4 " << lg4);
    REQUIRE((lp > 0.75 && lp < 1.25));
    REQUIRE((mp > 1.75 && mp < 2.25));
    REQUIRE((lg2 > 1.75 && lg2 < 2.5));
    REQUIRE((lg4 > 3.5 && lg4 < 4.5));
}

TEST_CASE("estimate_order: validation and roundoff error path") {
    Vector v(2);
    v << 1.0, 0.0;
    const Sampler constant = [](double) -> Matrix { return sigma_z(); };
    REQUIRE_THROWS_AS(estimate_order(Rule::LP, constant, 1.0, {8, 16, 32}, v),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(estimate_order(Rule::LP, constant, 1.0, {8, 16, 32, 40}, v),
                      std::invalid_argument);
    // constant generator: every rule is exact, all errors sit at roundoff
    REQUIRE_THROWS_WITH(estimate_order(Rule::MP, constant, 1.0, order_counts, v),
                        Catch::Matchers::ContainsSubstring("cannot estimate order"));
}

TEST_CASE("estimate_order: state-dependent radiation damping") {
    // swept-field radiation damping: ramp 0 -> 200 Hz over 0.5 s,
    // T1 = T2 = 0.1 s, k_rd = 40 Hz, initial state 2 degrees off -Z
    RadiationDampingParams p;
    p.r1 = p.r2 = 10.0;
    p.k_rd = 40.0;
    p.mu_eq = 1.0;
    const auto omega_ramp = [](double t) { return 2 * M_PI * 200.0 * t / 0.5; };
    const StateSampler sampler = raddamp_sampler(p, omega_ramp);
    const double tilt = 2.0 * M_PI / 180.0;
    const Vector initial = raddamp_state({std::sin(tilt), 0.0, -std::cos(tilt)});

    const std::vector<int> counts = {200, 400, 800, 1600, 3200};
    const double lp =
        -estimate_order_state_dependent(StateRule::LP, sampler, 0.5, counts, initial);
    const double lg2 =
        -estimate_order_state_dependent(StateRule::LG2, sampler, 0.5, counts, initial);
    const double lg4 =
        -estimate_order_state_dependent(StateRule::LG4, sampler, 0.5, counts, initial);
    INFO("orders: LP " << lp << " LG2 " << lg2 << " LG4 " << lg4);
    REQUIRE((lp > 0.75 && lp < 1.25));
    REQUIRE((lg2 > 1.75 && lg2 < 2.5));
    REQUIRE((lg4 > 3.5 && lg4 < 4.5));
}

TEST_CASE("propagate_isospectral") {
    auto g = test::rng(106);
    SECTION("maximally mixed state is a fixed point") {
        const Matrix rho = Matrix::Identity(4, 4) / 4.0;
        const Matrix h = test::random_hermitian(g, 4, 1.0);
        const Sampler fixed = [&](double t) -> Matrix { return Matrix(std::cos(t) * h); };
        const Matrix out = propagate_isospectral(Rule::LG4, fixed, TimeGrid::uniform(0, 1, 8), rho);
        REQUIRE((out - rho).norm() < 1e-12);
    }
    SECTION("single spin precession at the offset frequency") {
        const double w = 2.0;
        const SpinOperators ops = spin_operators(Spin::Half);
        const Sampler sampler = [&](double) -> Matrix { return Matrix(w * ops.sz); };
        const Matrix rho0 = ops.sx;
        const double t = 0.7;
        const Matrix rho =
            propagate_isospectral(Rule::MP, sampler, TimeGrid::uniform(0, t, 5), rho0);
        const Matrix want = Matrix(std::cos(w * t) * ops.sx + std::sin(w * t) * ops.sy);
        REQUIRE((rho - want).norm() < 1e-12);
    }
    SECTION("eigenvalues and trace are preserved") {
        Matrix rho = test::random_hermitian(g, 4, 1.0);
        rho = rho * rho.adjoint(); // positive semidefinite
        rho /= rho.trace().real();
        const Matrix h0 = test::random_hermitian(g, 4, 2.0);
        const Matrix h1 = test::random_hermitian(g, 4, 2.0);
        const Sampler sampler = [&](double t) -> Matrix { return Matrix(h0 + std::sin(t) * h1); };
        const Matrix out =
            propagate_isospectral(Rule::LG2, sampler, TimeGrid::uniform(0, 1.5, 20), rho);
        Eigen::SelfAdjointEigenSolver<Matrix> before(rho), after(out);
        REQUIRE((before.eigenvalues() - after.eigenvalues()).norm() < 1e-10);
        REQUIRE(std::abs((out.trace() - rho.trace()).real()) < 1e-12);
        REQUIRE(hermiticity_error(out) < 1e-12);
    }
    SECTION("non-Hermitian sampler output is rejected") {
        const Sampler bad = [&g](double) { return test::random_matrix(g, 3); };
        const Matrix rho = Matrix::Identity(3, 3) / 3.0;
        REQUIRE_THROWS_AS(propagate_isospectral(Rule::LP, bad, TimeGrid::uniform(0, 1, 2), rho),
                          std::invalid_argument);
    }
}
