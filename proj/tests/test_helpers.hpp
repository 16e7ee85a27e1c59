#pragma once

#include "liepulse/linalg.hpp"

#include <cstdint>
#include <random>

// Deterministic random inputs for the test oracles.

namespace test {

using liepulse::Complex;
using liepulse::Matrix;
using liepulse::Vector;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo = -1.0, double hi = 1.0) {
    const double u = (g() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

inline Matrix random_matrix(std::mt19937_64& g, int n, double scale = 1.0) {
    Matrix m(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) m(i, j) = scale * Complex(uniform(g), uniform(g));
    return m;
}

inline Matrix random_hermitian(std::mt19937_64& g, int n, double scale = 1.0) {
    Matrix m = random_matrix(g, n, scale);
    return Matrix(0.5 * (m + m.adjoint()));
}

inline Vector random_vector(std::mt19937_64& g, int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = Complex(uniform(g), uniform(g));
    return v;
}

inline Vector random_state(std::mt19937_64& g, int n) {
    Vector v = random_vector(g, n);
    return v / v.norm();
}

// Eigendecomposition oracle for exp(-i*h) with Hermitian h.
inline Matrix expm_skew_oracle(const Matrix& h, double t = 1.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const auto& vecs = es.eigenvectors();
    Vector phases(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k)
        phases[k] = std::exp(Complex(0.0, -t * es.eigenvalues()[k]));
    return vecs * phases.asDiagonal() * vecs.adjoint();
}

inline double rel_err(const Matrix& got, const Matrix& want) {
    return (got - want).norm() / want.norm();
}

inline double rel_err(const Vector& got, const Vector& want) {
    return (got - want).norm() / want.norm();
}

} // namespace test
