#include "balsim/diffusion.hpp"

#include "balsim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace balsim {

namespace {

std::size_t grid_index(double t, double dt, std::size_t length) {
    const double raw = t / dt;
    const auto idx = static_cast<long long>(std::llround(raw));
    if (idx < 0 || std::abs(raw - static_cast<double>(idx)) > 1e-9 * std::max(1.0, raw)) {
        throw std::invalid_argument("requested time is not on the integration grid");
    }
    if (static_cast<std::size_t>(idx) >= length) {
        throw std::invalid_argument("requested time lies beyond the integrated horizon");
    }
    return static_cast<std::size_t>(idx);
}

} // namespace

const DiffusionState& DiffusionPath::at_time(double t) const {
    return states[grid_index(t, dt, states.size())];
}

DiffusionPath integrate(double beta, double x1_0, double x2_0, double horizon, double dt,
                        std::uint64_t seed, const IntegrateOptions& options) {
    if (beta <= 0.0) throw std::invalid_argument("integrate: beta must be positive");
    if (dt <= 0.0) throw std::invalid_argument("integrate: dt must be positive");
    if (horizon < 0.0) throw std::invalid_argument("integrate: horizon must be >= 0");
    if (x1_0 > 0.0) throw std::invalid_argument("integrate: x1(0) must be <= 0");
    if (x2_0 < 0.0) throw std::invalid_argument("integrate: x2(0) must be >= 0");

    const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-12));
    DiffusionPath path;
    path.dt = dt;
    path.states.reserve(steps + 1);
    path.du.reserve(steps);
    path.states.push_back({x1_0, x2_0, 0.0, 0.0});

    Rng rng(substream_seed(seed, "diffusion-noise"));
    const double noise_scale = std::sqrt(2.0 * dt) * (options.antithetic ? -1.0 : 1.0);

    double x1 = x1_0;
    double x2 = x2_0;
    double u1 = 0.0;
    for (std::size_t step = 1; step <= steps; ++step) {
        const double xi = options.noise ? rng.normal() : 0.0;
        const double drifted = x1 + (-x1 + x2 - beta) * dt + noise_scale * xi;
        const double du = std::max(drifted, 0.0);
        x1 = drifted - du;
        x2 = x2 + du - x2 * dt;
        u1 += du;
        path.du.push_back(du);
        path.states.push_back({x1, x2, u1, static_cast<double>(step) * dt});
    }
    return path;
}

MomentSummary moments(std::span<const DiffusionPath> paths, double t) {
    if (paths.size() < 2) throw std::invalid_argument("moments: need at least two paths");
    const double dt = paths.front().dt;
    for (const auto& p : paths) {
        if (p.dt != dt) throw std::invalid_argument("moments: paths use different grids");
    }
    const std::size_t idx = grid_index(t, dt, paths.front().states.size());

    MomentSummary summary;
    summary.paths = static_cast<int>(paths.size());
    for (const auto& p : paths) {
        if (idx >= p.states.size()) {
            throw std::invalid_argument("moments: a path is shorter than the requested time");
        }
        summary.mean_x1 += p.states[idx].x1;
        summary.mean_x2 += p.states[idx].x2;
    }
    summary.mean_x1 /= summary.paths;
    summary.mean_x2 /= summary.paths;
    for (const auto& p : paths) {
        const double d1 = p.states[idx].x1 - summary.mean_x1;
        const double d2 = p.states[idx].x2 - summary.mean_x2;
        summary.var_x1 += d1 * d1;
        summary.var_x2 += d2 * d2;
    }
    summary.var_x1 /= summary.paths - 1;
    summary.var_x2 /= summary.paths - 1;
    return summary;
}

} // namespace balsim
