#pragma once

/// Regularized reference integrator.
///
/// The discontinuous sign interactions are smoothed by the ramp kernel
/// sign_d(r) = clamp(r / delta, -1, 1), and the resulting smooth ODE is
/// integrated with classical fixed-step RK4.  As delta -> 0 the smooth flow
/// converges to the exact event-driven dynamics away from collision
/// instants, giving an independent check that shares no code with the
/// event engine.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "engine.hpp"

namespace twospecies {

/// Ramp regularization of sign(r) with half-width delta.
inline double ramp_sign(double r, double delta) {
    return std::clamp(r / delta, -1.0, 1.0);
}

/// Right-hand side of the regularized system:
///   dx_i/dt = (1/N) [ sum_{k != i} sign_d(x_i - x_k) - sum_j sign_d(x_i - y_j) ]
/// and symmetrically for the second species.  O(N^2).
inline void regularized_rhs(const std::vector<double>& x, const std::vector<double>& y,
                            double delta, std::vector<double>& dx, std::vector<double>& dy) {
    const std::size_t n = x.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    dx.assign(n, 0.0);
    dy.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i) acc += ramp_sign(x[i] - x[k], delta);
            acc -= ramp_sign(x[i] - y[k], delta);
        }
        dx[i] = acc * inv_n;
    }
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            if (l != j) acc += ramp_sign(y[j] - y[l], delta);
            acc -= ramp_sign(y[j] - x[l], delta);
        }
        dy[j] = acc * inv_n;
    }
}

/// Integrate the regularized system from `s0` and return snapshots at the
/// requested times (non-decreasing, all >= s0.t).  The step is capped at
/// delta/4 so the kernel's inner layer is always resolved.
inline std::vector<Snapshot> fine_step_integrate(const ParticleState& s0, double delta, double dt,
                                                 const std::vector<double>& sample_times) {
    s0.validate();
    if (!(delta > 0.0)) throw std::invalid_argument("regularization width must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("step must be positive");
    if (dt > delta / 4.0)
        throw std::invalid_argument("step too coarse: dt must be at most delta/4");
    for (std::size_t k = 0; k < sample_times.size(); ++k) {
        if (sample_times[k] < s0.t || (k > 0 && sample_times[k] < sample_times[k - 1]))
            throw std::invalid_argument("sample times must be non-decreasing and >= start time");
    }

    const std::size_t n = s0.x.size();
    std::vector<double> x = s0.x, y = s0.y;
    std::vector<double> k1x(n), k1y(n), k2x(n), k2y(n), k3x(n), k3y(n), k4x(n), k4y(n);
    std::vector<double> tx(n), ty(n);
    double t = s0.t;

    auto rk4_step = [&](double h) {
        regularized_rhs(x, y, delta, k1x, k1y);
        for (std::size_t i = 0; i < n; ++i) {
            tx[i] = x[i] + 0.5 * h * k1x[i];
            ty[i] = y[i] + 0.5 * h * k1y[i];
        }
        regularized_rhs(tx, ty, delta, k2x, k2y);
        for (std::size_t i = 0; i < n; ++i) {
            tx[i] = x[i] + 0.5 * h * k2x[i];
            ty[i] = y[i] + 0.5 * h * k2y[i];
        }
        regularized_rhs(tx, ty, delta, k3x, k3y);
        for (std::size_t i = 0; i < n; ++i) {
            tx[i] = x[i] + h * k3x[i];
            ty[i] = y[i] + h * k3y[i];
        }
        regularized_rhs(tx, ty, delta, k4x, k4y);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            y[i] += h / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i]);
        }
    };

    std::vector<Snapshot> out;
    out.reserve(sample_times.size());
    for (double target : sample_times) {
        while (t < target) {
            double h = std::min(dt, target - t);
            rk4_step(h);
            t += h;
        }
        out.push_back({target, x, y});
    }
    return out;
}

/// Largest per-particle deviation between two states of equal size.
inline double sup_distance(const Snapshot& a, const Snapshot& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.x.size(); ++i)
        worst = std::max(worst, std::abs(a.x[i] - b.x[i]));
    for (std::size_t j = 0; j < a.y.size(); ++j)
        worst = std::max(worst, std::abs(a.y[j] - b.y[j]));
    return worst;
}

}  // namespace twospecies
