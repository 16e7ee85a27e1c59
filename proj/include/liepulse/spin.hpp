#pragma once

#include "liepulse/integrators.hpp"
#include "liepulse/linalg.hpp"

#include <functional>
#include <vector>

// Drift and control generators for the benchmark systems: spin operators,
// J-coupled chains, Liouville-space superoperators, radiation damping, and
// a quadrupolar spin-1 model.

namespace liepulse {

enum class Spin { Half, One };

struct SpinOperators {
    Matrix sx, sy, sz;
};

/// Standard angular momentum matrices; [Sx, Sy] = i Sz.
inline SpinOperators spin_operators(Spin spin) {
    SpinOperators ops;
    const Complex i(0.0, 1.0);
    switch (spin) {
        case Spin::Half:
            ops.sx = Matrix::Zero(2, 2);
            ops.sx << 0.0, 0.5, 0.5, 0.0;
            ops.sy = Matrix::Zero(2, 2);
            ops.sy << 0.0, -0.5 * i, 0.5 * i, 0.0;
            ops.sz = Matrix::Zero(2, 2);
            ops.sz << 0.5, 0.0, 0.0, -0.5;
            return ops;
        case Spin::One: {
            const double s = 1.0 / std::sqrt(2.0);
            ops.sx = Matrix::Zero(3, 3);
            ops.sx << 0.0, s, 0.0, s, 0.0, s, 0.0, s, 0.0;
            ops.sy = Matrix::Zero(3, 3);
            ops.sy << 0.0, -s * i, 0.0, s * i, 0.0, -s * i, 0.0, s * i, 0.0;
            ops.sz = Matrix::Zero(3, 3);
            ops.sz << 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0;
            return ops;
        }
    }
    throw std::invalid_argument("spin_operators: unsupported spin quantum number");
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

struct SpinChainSpec {
    int n_spins = 1;
    Spin spin = Spin::Half;
    std::vector<double> offsets;   // rad/s, one per spin
    std::vector<double> couplings; // rad/s, nearest neighbour, n_spins - 1 values
    double r1 = 0.0, r2 = 0.0;     // 1/s, used when building Liouvillians

    void validate() const {
        if (n_spins < 1) throw std::invalid_argument("SpinChainSpec: need at least one spin");
        if (offsets.size() != static_cast<std::size_t>(n_spins))
            throw std::invalid_argument("SpinChainSpec: offsets length must equal n_spins");
        if (couplings.size() != static_cast<std::size_t>(n_spins - 1))
            throw std::invalid_argument("SpinChainSpec: couplings length must be n_spins - 1");
        if (r1 < 0 || r2 < 0) throw std::invalid_argument("SpinChainSpec: rates must be >= 0");
    }
};

struct ChainOperators {
    Matrix drift;                 // sum of offset and J terms
    std::vector<Matrix> controls; // total Sx, total Sy
};

namespace detail {

// Embeds a single-site operator at the given site of the product space.
inline Matrix embed(const Matrix& op, int site, int n_spins) {
    const Eigen::Index d = op.rows();
    Matrix out = Matrix::Identity(1, 1);
    for (int k = 0; k < n_spins; ++k)
        out = kron(out, k == site ? op : Matrix::Identity(d, d));
    return out;
}

} // namespace detail

/// Chain Hamiltonian: sum_i offset_i Sz_i + sum_i J_i (S_i . S_{i+1}),
/// with total Sx and total Sy as the control operators.
inline ChainOperators chain_hamiltonian(const SpinChainSpec& spec) {
    spec.validate();
    const SpinOperators one = spin_operators(spec.spin);
    const Eigen::Index site_dim = one.sx.rows();
    double dim = 1.0;
    for (int k = 0; k < spec.n_spins; ++k) dim *= static_cast<double>(site_dim);
    if (dim > 4096.0)
        throw std::invalid_argument("chain_hamiltonian: product space exceeds 4096 dimensions");

    const Eigen::Index n = static_cast<Eigen::Index>(dim);
    ChainOperators out;
    out.drift = Matrix::Zero(n, n);
    Matrix total_sx = Matrix::Zero(n, n);
    Matrix total_sy = Matrix::Zero(n, n);

    std::vector<Matrix> sx(spec.n_spins), sy(spec.n_spins), sz(spec.n_spins);
    for (int k = 0; k < spec.n_spins; ++k) {
        sx[k] = detail::embed(one.sx, k, spec.n_spins);
        sy[k] = detail::embed(one.sy, k, spec.n_spins);
        sz[k] = detail::embed(one.sz, k, spec.n_spins);
        out.drift += spec.offsets[k] * sz[k];
        total_sx += sx[k];
        total_sy += sy[k];
    }
    for (int k = 0; k + 1 < spec.n_spins; ++k)
        out.drift += spec.couplings[k] *
                     (sx[k] * sx[k + 1] + sy[k] * sy[k + 1] + sz[k] * sz[k + 1]);

    out.controls = {std::move(total_sx), std::move(total_sy)};
    return out;
}

/// Liouville-space evolution generator for a Hamiltonian h and the simple
/// diagonal dissipator: L = K + iR where K vec(rho) = vec([h, rho]) under
/// column-major vectorisation, R carries -r2 on coherence positions and -r1
/// on populations (states are traceless deviations, so plain population
/// decay is difference relaxation).
inline Matrix liouvillian(const Matrix& h, double r1 = 0.0, double r2 = 0.0) {
    require_square_finite(h, "liouvillian");
    if (!is_hermitian(h))
        throw std::invalid_argument("liouvillian: Hamiltonian must be Hermitian");
    if (r1 < 0 || r2 < 0) throw std::invalid_argument("liouvillian: rates must be >= 0");
    const Eigen::Index d = h.rows();
    const Matrix id = Matrix::Identity(d, d);
    Matrix l = kron(id, h) - kron(h.transpose(), id);
    if (r1 > 0 || r2 > 0) {
        const Complex i(0.0, 1.0);
        for (Eigen::Index col = 0; col < d; ++col)
            for (Eigen::Index row = 0; row < d; ++row)
                l(col * d + row, col * d + row) += i * (row == col ? -r1 : -r2);
    }
    return l;
}

inline Vector vec(const Matrix& rho) {
    return Eigen::Map<const Vector>(rho.data(), rho.size());
}

inline Matrix unvec(const Vector& v) {
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(v.size()))));
    if (d * d != v.size()) throw std::invalid_argument("unvec: length is not a perfect square");
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

struct RadiationDampingParams {
    double omega = 0.0;  // Larmor/offset angular frequency, rad/s
    double r1 = 0.0;     // longitudinal relaxation rate, 1/s
    double r2 = 0.0;     // transverse relaxation rate, 1/s
    double k_rd = 0.0;   // radiation damping rate, 1/s
    double mu_eq = 0.0;  // equilibrium longitudinal magnetisation

    void validate() const {
        if (r1 < 0 || r2 < 0 || k_rd < 0)
            throw std::invalid_argument("RadiationDampingParams: rates must be >= 0");
    }
};

/// Pseudolinear Bloch matrix B such that d(mu)/dt = -B*mu for mu_eq = 0:
/// the state dependence enters through the k_rd*mu_Z diagonal terms and the
/// k_rd*mu_X, k_rd*mu_Y bottom-row terms. The bottom-row sign makes the
/// back-action feed mu_Z upward, d(mu_Z)/dt = +k_rd*(mu_X^2 + mu_Y^2), so
/// the damping term conserves |mu| and drives inversion recovery.
inline Eigen::Matrix3d raddamp_generator(const RadiationDampingParams& p,
                                         const Eigen::Vector3d& mu) {
    p.validate();
    if (!mu.allFinite())
        throw std::invalid_argument("raddamp_generator: non-finite state");
    Eigen::Matrix3d b;
    b << p.r2 + p.k_rd * mu.z(), p.omega, 0.0,
        -p.omega, p.r2 + p.k_rd * mu.z(), 0.0,
        -p.k_rd * mu.x(), -p.k_rd * mu.y(), p.r1;
    return b;
}

/// Affine extension: the state is augmented with a constant fourth component
/// equal to 1, which folds the r1*mu_eq recovery term into a 4x4
/// pseudolinear generator.
inline Eigen::Matrix4d raddamp_generator_affine(const RadiationDampingParams& p,
                                                const Eigen::Vector3d& mu) {
    Eigen::Matrix4d b = Eigen::Matrix4d::Zero();
    b.topLeftCorner<3, 3>() = raddamp_generator(p, mu);
    b(2, 3) = -p.r1 * p.mu_eq;
    return b;
}

/// State-dependent sampler over augmented states (mu_x, mu_y, mu_z, 1) in
/// the -i*L convention of the step kernels: exp(-i*L*dt) = exp(-B*dt).
/// An optional omega(t) override supports swept-field problems.
inline StateSampler raddamp_sampler(RadiationDampingParams p,
                                    std::function<double(double)> omega_of_t = {}) {
    p.validate();
    return [p, omega_of_t](double t, const Vector& state) -> Matrix {
        if (state.size() != 4)
            throw std::invalid_argument("raddamp_sampler: expected augmented 4-vector state");
        RadiationDampingParams at = p;
        if (omega_of_t) at.omega = omega_of_t(t);
        const Eigen::Vector3d mu = state.head<3>().real();
        return Complex(0.0, -1.0) * raddamp_generator_affine(at, mu).cast<Complex>();
    };
}

inline Vector raddamp_state(const Eigen::Vector3d& mu) {
    Vector v(4);
    v << mu.x(), mu.y(), mu.z(), 1.0;
    return v;
}

struct QuadrupolarSpec {
    double omega_q = 0.0; // first-order splitting, rad/s
    double offset = 0.0;  // rad/s
};

/// Spin-1 drift: offset*Sz + omega_q*(Sz^2 - (2/3)*1).
inline Matrix quadrupolar_drift(const QuadrupolarSpec& spec) {
    const SpinOperators ops = spin_operators(Spin::One);
    return spec.offset * ops.sz +
           spec.omega_q * (ops.sz * ops.sz - (2.0 / 3.0) * Matrix::Identity(3, 3));
}

/// Powder substitute: omega_q values from the second Legendre polynomial on
/// a uniform cos(theta) grid, which carries the correct powder measure with
/// uniform weights.
inline std::vector<double> quadrupolar_powder(double omega_q_max, int n_orientations) {
    if (n_orientations < 1)
        throw std::invalid_argument("quadrupolar_powder: need at least one orientation");
    std::vector<double> out(n_orientations);
    for (int k = 0; k < n_orientations; ++k) {
        const double cos_theta = (n_orientations == 1)
                                     ? 0.0
                                     : static_cast<double>(k) / (n_orientations - 1);
        out[k] = omega_q_max * 0.5 * (3.0 * cos_theta * cos_theta - 1.0);
    }
    return out;
}

} // namespace liepulse
