#pragma once

#include "balsim/engine.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace balsim {

// Largest gap |X_i^a - X_i^b| over the shared jump epochs of two scaled
// paths from one coupled run; exact for piecewise-constant paths.
double sup_distance(const ScaledPath& a, const ScaledPath& b, int coordinate);

// Pathwise check of |Q_i^Pi(t) - Q_i^Pi2(t)| <= 2 L^Pi2(t) for a policy in
// the d0 = N class coupled with the buffer-2 idle-first scheme Pi(N,1).
struct SandwichReport {
    bool pass = true;
    double max_excess = 0.0; // max over epochs/levels of |gap| - bound; <= 0 iff pass
    double worst_gap = 0.0;
    std::optional<double> first_violation_time;
};

SandwichReport sandwich_check(const SystemPath& pi, const SystemPath& pi2);

// Cross-N study driven by one coupled triple per replication: the
// buffer-2 idle-first scheme (overflow counts), its full-information
// partner (sup distance of X_2), and a buffer-3 probe (sup of X_3).
struct ScalingStudyConfig {
    std::vector<int> n_grid{100, 400, 1600};
    double beta = 1.0;
    double horizon = 10.0;
    int reps = 50;
    double gamma1 = 0.0; // initial vacant-server coefficient
    double gamma2 = 0.0; // initial two-task coefficient
    std::string pi2 = "jiq";
    std::string partner = "jsq";
    std::string tail_probe = "pi:N,2,2";
};

struct ScalingPoint {
    int n = 0;
    int rep = 0;
    std::uint64_t seed = 0;
    long long overflow = 0;
    double overflow_scaled = 0.0; // L(T)/sqrt(N)
    double sup_x3 = 0.0;
    double sup_dist_x2 = 0.0;
};

struct ScalingSummaryRow {
    int n = 0;
    double median_overflow_scaled = 0.0;
    double median_sup_x3 = 0.0;
    double mean_sup_dist_x2 = 0.0;
};

struct ScalingStudy {
    ScalingStudyConfig config;
    std::uint64_t seed = 0;
    std::vector<ScalingPoint> points;
    std::vector<ScalingSummaryRow> summary; // one row per grid N, in order
};

ScalingStudy overflow_scaling(const ScalingStudyConfig& config, std::uint64_t seed);

// Terminal-time moment comparison between the scaled occupancy chain and
// the limiting diffusion, started from matching deterministic states.
struct CtmcVsSdeConfig {
    int n = 1600; // must be a perfect square
    double beta = 1.0;
    double horizon = 5.0;
    double dt = 1e-3;
    int reps = 200; // per side
    double x1_0 = 0.0;
    double x2_0 = 0.0;
    std::string policy = "jsq";
    bool antithetic = false; // pair the diffusion paths
};

struct SideMoments {
    double mean_x1 = 0.0;
    double mean_x2 = 0.0;
    double sd_x1 = 0.0;
    double sd_x2 = 0.0;
    int reps = 0;
};

struct CtmcVsSdeReport {
    SideMoments ctmc;
    SideMoments sde;
    double dmean_x1 = 0.0;
    double dmean_x2 = 0.0;
    bool ci95_overlap_x1 = true;
    bool ci95_overlap_x2 = true;
};

CtmcVsSdeReport ctmc_vs_sde(const CtmcVsSdeConfig& config, std::uint64_t seed);

double median(std::vector<double> values);

} // namespace balsim
