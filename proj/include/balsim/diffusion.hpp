#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace balsim {

// State of the limiting two-dimensional reflected diffusion: x1 <= 0 is
// kept below zero by the cumulative regulator u1, which feeds x2.
struct DiffusionState {
    double x1 = 0.0;
    double x2 = 0.0;
    double u1 = 0.0;
    double t = 0.0;
};

// Uniform-grid trajectory. du[i] is the regulator increment of the step
// from states[i] to states[i+1]; it is positive only when the step ends
// pinned at x1 == 0 (discrete complementarity, exact by construction).
struct DiffusionPath {
    double dt = 0.0;
    std::vector<DiffusionState> states;
    std::vector<double> du;

    const DiffusionState& at_time(double t) const; // grid points only
};

struct IntegrateOptions {
    bool noise = true;       // off: deterministic skeleton for ODE oracles
    bool antithetic = false; // negate the driving Gaussians of this path
};

// Euler-Maruyama with Skorokhod projection:
//   x1* = x1 + (-x1 + x2 - beta) dt + sqrt(2 dt) xi
//   dU  = max(x1*, 0);  x1 <- x1* - dU;  x2 <- x2 + dU - x2 dt.
DiffusionPath integrate(double beta, double x1_0, double x2_0, double horizon, double dt,
                        std::uint64_t seed, const IntegrateOptions& options = {});

struct MomentSummary {
    double mean_x1 = 0.0;
    double mean_x2 = 0.0;
    double var_x1 = 0.0;
    double var_x2 = 0.0;
    int paths = 0;
};

// Unbiased sample moments at one shared grid time.
MomentSummary moments(std::span<const DiffusionPath> paths, double t);

} // namespace balsim
