#pragma once

#include "liepulse/linalg.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

// Series-RLC probe response: rotating-frame envelopes are mixed up to the
// laboratory frame, filtered through the exact zero-order-hold discretization
// of the two-state circuit ODE, and heterodyned back down. The transfer
// function is the bandpass current response T(s) = (s/(Q w0)) /
// (s^2/w0^2 + s/(Q w0) + 1), normalized to unit gain at resonance.

namespace liepulse {

struct RLCParams {
    double omega0 = 0.0; // resonance angular frequency, rad/s
    double q = 0.0;      // quality factor

    void validate() const {
        if (!(omega0 > 0)) throw std::invalid_argument("RLCParams: omega0 must be positive");
        if (!(q > 0.5)) throw std::invalid_argument("RLCParams: Q must exceed 1/2 (underdamped)");
    }
};

enum class EnvelopeInterp { Hold, Linear };

// Rotating-frame envelope: in-phase and quadrature channels on a uniform
// grid. Hold waveforms carry one value per dwell, Linear waveforms one value
// per node.
struct RotatingWaveform {
    double sample_rate = 0.0; // Hz
    Eigen::VectorXd cx, cy;   // rad/s
    EnvelopeInterp interp = EnvelopeInterp::Linear;

    int points() const { return static_cast<int>(cx.size()); }

    double duration() const {
        return interp == EnvelopeInterp::Hold ? points() / sample_rate
                                              : (points() - 1) / sample_rate;
    }

    void validate() const {
        if (!(sample_rate > 0))
            throw std::invalid_argument("RotatingWaveform: sample rate must be positive");
        if (cx.size() != cy.size())
            throw std::invalid_argument("RotatingWaveform: channels must be equal length");
        if (points() < 1 || (interp == EnvelopeInterp::Linear && points() < 2))
            throw std::invalid_argument("RotatingWaveform: too few points");
    }

    // Envelope value at time t, clamped to the waveform support.
    std::pair<double, double> at(double t) const {
        const double u = t * sample_rate;
        if (interp == EnvelopeInterp::Hold) {
            const int i = std::clamp(static_cast<int>(std::floor(u)), 0, points() - 1);
            return {cx[i], cy[i]};
        }
        const int i = std::clamp(static_cast<int>(std::floor(u)), 0, points() - 2);
        const double w = std::clamp(u - i, 0.0, 1.0);
        return {(1 - w) * cx[i] + w * cx[i + 1], (1 - w) * cy[i] + w * cy[i + 1]};
    }
};

struct LabWaveform {
    double sample_rate = 0.0; // Hz
    Eigen::VectorXd v;

    void validate() const {
        if (!(sample_rate > 0))
            throw std::invalid_argument("LabWaveform: sample rate must be positive");
    }
};

/// Mixes a rotating-frame envelope with the carrier:
/// V(t) = cx(t) cos(w0 t) - cy(t) sin(w0 t) on a grid of `oversampling`
/// samples per carrier period.
inline LabWaveform upconvert(const RotatingWaveform& w, double omega0, int oversampling) {
    w.validate();
    if (!(omega0 > 0)) throw std::invalid_argument("upconvert: omega0 must be positive");
    if (oversampling < 8)
        throw std::invalid_argument("upconvert: need at least 8 samples per carrier period");
    LabWaveform out;
    out.sample_rate = oversampling * omega0 / (2.0 * M_PI);
    const auto n = static_cast<Eigen::Index>(std::llround(w.duration() * out.sample_rate));
    out.v.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        // midpoint timestamps: the zero-order-hold staircase then carries no
        // half-sample phase lag relative to the continuous carrier
        const double t = (j + 0.5) / out.sample_rate;
        const auto [cx, cy] = w.at(t);
        out.v[j] = cx * std::cos(omega0 * t) - cy * std::sin(omega0 * t);
    }
    return out;
}

/// Runs the lab-frame signal through the circuit from zero initial
/// conditions. States are capacitor voltage and current; the discrete update
/// is the exact matrix-exponential zero-order-hold map, and the output is the
/// current scaled to unit gain at resonance.
inline LabWaveform rlc_filter(const LabWaveform& v, const RLCParams& p) {
    v.validate();
    p.validate();
    if (v.sample_rate < 8.0 * p.omega0 / (2.0 * M_PI))
        throw std::invalid_argument("rlc_filter: sample rate too low relative to omega0");

    // x = (V_C, I), L = 1: x' = A x + B u with A = [[0, w0^2], [-1, -w0/Q]].
    // exp([[A, B], [0, 0]] h) packs the ZOH pair (Ad, Bd) into one call. The
    // output taps the state at the interval midpoint, matching the midpoint
    // timestamps of the sampled carrier.
    const double h = 1.0 / v.sample_rate;
    Matrix block = Matrix::Zero(3, 3);
    block(0, 1) = p.omega0 * p.omega0;
    block(1, 0) = -1.0;
    block(1, 1) = -p.omega0 / p.q;
    block(1, 2) = 1.0;
    const Matrix zoh = expm(h * block);
    const Eigen::Matrix2d ad = zoh.topLeftCorner(2, 2).real();
    const Eigen::Vector2d bd = zoh.topRightCorner(2, 1).real();
    const Matrix zoh_half = expm(0.5 * h * block);
    const Eigen::Matrix2d ad_half = zoh_half.topLeftCorner(2, 2).real();
    const Eigen::Vector2d bd_half = zoh_half.topRightCorner(2, 1).real();
    const double gain = p.omega0 / p.q;

    LabWaveform out;
    out.sample_rate = v.sample_rate;
    out.v.resize(v.v.size());
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    for (Eigen::Index j = 0; j < v.v.size(); ++j) {
        const Eigen::Vector2d x_mid = ad_half * x + bd_half * v.v[j];
        out.v[j] = gain * x_mid[1];
        x = ad * x + bd * v.v[j];
    }
    return out;
}

/// Heterodynes a lab-frame signal back to the rotating frame: multiply by
/// 2cos(w0 t) and -2sin(w0 t), then low-pass with a trapezoid average over
/// exactly one carrier period (which nulls the 2*w0 image).
inline RotatingWaveform downconvert(const LabWaveform& v, double omega0) {
    v.validate();
    if (!(omega0 > 0)) throw std::invalid_argument("downconvert: omega0 must be positive");
    const double per_period = v.sample_rate * 2.0 * M_PI / omega0;
    const int window = static_cast<int>(std::llround(per_period));
    if (window < 8)
        throw std::invalid_argument("downconvert: sample rate too low relative to omega0");

    const Eigen::Index n = v.v.size();
    Eigen::VectorXd raw_i(n), raw_q(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double t = (j + 0.5) / v.sample_rate; // matches the upconvert timestamps
        raw_i[j] = 2.0 * v.v[j] * std::cos(omega0 * t);
        raw_q[j] = -2.0 * v.v[j] * std::sin(omega0 * t);
    }

    RotatingWaveform out;
    out.sample_rate = v.sample_rate;
    out.interp = EnvelopeInterp::Linear;
    out.cx.resize(n);
    out.cy.resize(n);
    const int half = window / 2;
    for (Eigen::Index j = 0; j < n; ++j) {
        double si = 0, sq = 0, wsum = 0;
        for (int k = -half; k <= half; ++k) {
            const Eigen::Index idx = j + k;
            if (idx < 0 || idx >= n) continue;
            const double wgt = (k == -half || k == half) ? 0.5 : 1.0;
            si += wgt * raw_i[idx];
            sq += wgt * raw_q[idx];
            wsum += wgt;
        }
        out.cx[j] = si / wsum;
        out.cy[j] = sq / wsum;
    }
    return out;
}

/// Linear resampling of a rotating-frame waveform onto a new uniform grid.
inline RotatingWaveform resample(const RotatingWaveform& w, double sample_rate, int n_points,
                                 EnvelopeInterp interp) {
    w.validate();
    if (n_points < 1 || !(sample_rate > 0))
        throw std::invalid_argument("resample: bad target grid");
    RotatingWaveform out;
    out.sample_rate = sample_rate;
    out.interp = interp;
    out.cx.resize(n_points);
    out.cy.resize(n_points);
    for (int j = 0; j < n_points; ++j) {
        const auto [cx, cy] = w.at(j / sample_rate);
        out.cx[j] = cx;
        out.cy[j] = cy;
    }
    return out;
}

struct DistortionResult {
    RotatingWaveform output;      // on the input control grid
    RotatingWaveform compensated; // group-delay-compensated, on the input grid
    RotatingWaveform fine;        // compensated, at the full heterodyne rate
    double delay_s = 0.0;         // measured envelope delay
};

namespace detail {

// Envelope cross-correlation peak lag. The search runs on signals decimated
// to ~64 points per expected ring time, with a parabolic refinement of the
// peak; the returned lag is in full-rate samples.
inline Eigen::Index correlation_lag(const Eigen::VectorXd& in_x, const Eigen::VectorXd& in_y,
                                    const Eigen::VectorXd& out_x, const Eigen::VectorXd& out_y,
                                    Eigen::Index max_lag, Eigen::Index ring_samples) {
    const Eigen::Index n = in_x.size();
    max_lag = std::min(max_lag, n - 1);
    const Eigen::Index decim = std::max<Eigen::Index>(1, ring_samples / 64);
    const Eigen::Index nd = n / decim;
    const Eigen::Index max_lag_d = std::min(max_lag / decim, nd - 1);
    if (nd < 4 || max_lag_d < 1) return 0;

    auto score = [&](Eigen::Index lag_d) {
        double cr = 0, ci = 0;
        for (Eigen::Index j = 0; j + lag_d < nd; ++j) {
            const Eigen::Index a = j * decim, b = (j + lag_d) * decim;
            cr += in_x[a] * out_x[b] + in_y[a] * out_y[b];
            ci += in_x[a] * out_y[b] - in_y[a] * out_x[b];
        }
        return std::hypot(cr, ci);
    };

    Eigen::Index best = 0;
    double best_score = -1.0;
    std::vector<double> scores(max_lag_d + 1);
    for (Eigen::Index lag = 0; lag <= max_lag_d; ++lag) {
        scores[lag] = score(lag);
        if (scores[lag] > best_score) {
            best_score = scores[lag];
            best = lag;
        }
    }
    double refined = static_cast<double>(best);
    if (best > 0 && best < max_lag_d) {
        const double a = scores[best - 1], b = scores[best], c = scores[best + 1];
        const double denom = a - 2 * b + c;
        if (denom < 0) refined += 0.5 * (a - c) / denom;
    }
    const auto lag = static_cast<Eigen::Index>(std::llround(refined * decim));
    return std::clamp<Eigen::Index>(lag, 0, max_lag);
}

} // namespace detail

/// Full distortion chain upconvert -> rlc_filter -> downconvert, resampled
/// back to the control grid. The compensated copies are shifted by the peak
/// of the envelope cross-correlation with the input, which measures the
/// filter group delay.
inline DistortionResult distort(const RotatingWaveform& w, const RLCParams& p,
                                int oversampling) {
    w.validate();
    p.validate();
    const LabWaveform lab = upconvert(w, p.omega0, oversampling);
    const LabWaveform filtered = rlc_filter(lab, p);
    const RotatingWaveform down = downconvert(filtered, p.omega0);

    // reference input envelope on the heterodyne grid
    const Eigen::Index n = down.cx.size();
    Eigen::VectorXd in_x(n), in_y(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto [cx, cy] = w.at(j / down.sample_rate);
        in_x[j] = cx;
        in_y[j] = cy;
    }
    const double ring_time = 2.0 * p.q / p.omega0;
    const auto ring_samples =
        static_cast<Eigen::Index>(std::llround(ring_time * down.sample_rate));
    const auto max_lag = static_cast<Eigen::Index>(
        std::llround(std::min(0.5 * n / down.sample_rate, 4.0 * ring_time) *
                     down.sample_rate));
    const Eigen::Index lag =
        detail::correlation_lag(in_x, in_y, down.cx, down.cy, std::max<Eigen::Index>(1, max_lag),
                                std::max<Eigen::Index>(1, ring_samples));

    RotatingWaveform shifted = down;
    shifted.cx.setZero();
    shifted.cy.setZero();
    for (Eigen::Index j = 0; j + lag < n; ++j) {
        shifted.cx[j] = down.cx[j + lag];
        shifted.cy[j] = down.cy[j + lag];
    }
    for (Eigen::Index j = n - lag; j < n; ++j) {
        if (j < 0) continue;
        shifted.cx[j] = down.cx[n - 1];
        shifted.cy[j] = down.cy[n - 1];
    }

    DistortionResult result;
    result.delay_s = lag / down.sample_rate;
    result.output = resample(down, w.sample_rate, w.points(), w.interp);
    result.compensated = resample(shifted, w.sample_rate, w.points(), w.interp);
    result.fine = std::move(shifted);
    return result;
}

} // namespace liepulse
