#include "balsim/stats.hpp"

#include "balsim/diffusion.hpp"
#include "balsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace balsim {

double sup_distance(const ScaledPath& a, const ScaledPath& b, int coordinate) {
    if (coordinate < 1) throw std::out_of_range("sup_distance: coordinate must be >= 1");
    if (a.n_servers != b.n_servers || a.times.size() != b.times.size() || a.times != b.times) {
        throw std::invalid_argument("sup_distance: paths do not share their jump epochs");
    }
    const auto coord = static_cast<std::size_t>(coordinate - 1);
    double sup = 0.0;
    for (std::size_t j = 0; j < a.times.size(); ++j) {
        const double xa = coord < a.x[j].size() ? a.x[j][coord] : 0.0;
        const double xb = coord < b.x[j].size() ? b.x[j][coord] : 0.0;
        sup = std::max(sup, std::abs(xa - xb));
    }
    return sup;
}

namespace {

bool is_buffer2_idle_first(const PolicySpec& p) {
    return !p.is_unbounded() && p.cap() == 2 && p.selection_size(0) == p.n_servers() &&
           p.selection_size(1) == 1;
}

} // namespace

SandwichReport sandwich_check(const SystemPath& pi, const SystemPath& pi2) {
    if (!is_buffer2_idle_first(pi2.policy)) {
        throw std::invalid_argument("sandwich_check: reference policy must be Pi(N,1) with buffer 2");
    }
    if (!pi.policy.in_pi_class()) {
        throw std::invalid_argument("sandwich_check: compared policy must have d0 = N");
    }
    if (pi.n_servers != pi2.n_servers || pi.points.size() != pi2.points.size()) {
        throw std::invalid_argument("sandwich_check: paths are not from one coupled run");
    }

    SandwichReport report;
    report.max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pi.points.size(); ++j) {
        const auto& pa = pi.points[j];
        const auto& pb = pi2.points[j];
        if (pa.time != pb.time) {
            throw std::invalid_argument("sandwich_check: paths are not from one coupled run");
        }
        const double bound = 2.0 * static_cast<double>(pb.overflows);
        const std::size_t len = std::max(pa.q.size(), pb.q.size());
        for (std::size_t i = 0; i < len; ++i) {
            const int qa = i < pa.q.size() ? pa.q[i] : 0;
            const int qb = i < pb.q.size() ? pb.q[i] : 0;
            const double gap = std::abs(qa - qb);
            report.worst_gap = std::max(report.worst_gap, gap);
            report.max_excess = std::max(report.max_excess, gap - bound);
            if (gap > bound && report.pass) {
                report.pass = false;
                report.first_violation_time = pa.time;
            }
        }
    }
    return report;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

ScalingStudy overflow_scaling(const ScalingStudyConfig& config, std::uint64_t seed) {
    if (config.n_grid.empty()) throw std::invalid_argument("overflow_scaling: empty N grid");
    if (config.reps < 1) throw std::invalid_argument("overflow_scaling: reps must be >= 1");

    ScalingStudy study;
    study.config = config;
    study.seed = seed;

    for (const int n : config.n_grid) {
        const PolicySpec pi2 = parse_policy(config.pi2, n);
        const PolicySpec partner = parse_policy(config.partner, n);
        const PolicySpec probe = parse_policy(config.tail_probe, n);
        if (!is_buffer2_idle_first(pi2)) {
            throw std::invalid_argument("overflow_scaling: pi2 must resolve to Pi(N,1) with buffer 2");
        }
        if (!partner.in_pi_class() || !probe.in_pi_class()) {
            throw std::invalid_argument("overflow_scaling: companion policies must have d0 = N");
        }
        if (probe.is_unbounded() || probe.cap() < 3) {
            throw std::invalid_argument("overflow_scaling: tail probe needs buffer size >= 3");
        }

        const std::vector<PolicySpec> policies{pi2, partner, probe};
        std::vector<OccupancyVector> init;
        for (const auto& p : policies) {
            init.push_back(halfin_whitt_init(n, config.gamma1, config.gamma2, p.cap()));
        }

        std::vector<double> scaled_overflows;
        std::vector<double> sup_x3s;
        std::vector<double> sup_dists;
        for (int rep = 0; rep < config.reps; ++rep) {
            const std::uint64_t rep_seed =
                substream_seed(seed, "scaling/n=" + std::to_string(n), static_cast<std::uint64_t>(rep));
            const auto paths =
                run_coupled(policies, n, config.beta, config.horizon, init, rep_seed);

            ScalingPoint point;
            point.n = n;
            point.rep = rep;
            point.seed = rep_seed;
            point.overflow = paths[0].total_overflows();
            point.overflow_scaled =
                static_cast<double>(point.overflow) / std::sqrt(static_cast<double>(n));
            point.sup_x3 = scale(paths[2]).sup_coordinate(3);
            point.sup_dist_x2 = sup_distance(scale(paths[0]), scale(paths[1]), 2);
            scaled_overflows.push_back(point.overflow_scaled);
            sup_x3s.push_back(point.sup_x3);
            sup_dists.push_back(point.sup_dist_x2);
            study.points.push_back(point);
        }

        ScalingSummaryRow row;
        row.n = n;
        row.median_overflow_scaled = median(scaled_overflows);
        row.median_sup_x3 = median(sup_x3s);
        row.mean_sup_dist_x2 =
            std::accumulate(sup_dists.begin(), sup_dists.end(), 0.0) / sup_dists.size();
        study.summary.push_back(row);
    }
    return study;
}

namespace {

SideMoments summarize(const std::vector<double>& x1, const std::vector<double>& x2) {
    SideMoments side;
    side.reps = static_cast<int>(x1.size());
    side.mean_x1 = std::accumulate(x1.begin(), x1.end(), 0.0) / side.reps;
    side.mean_x2 = std::accumulate(x2.begin(), x2.end(), 0.0) / side.reps;
    double s1 = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < side.reps; ++i) {
        s1 += (x1[i] - side.mean_x1) * (x1[i] - side.mean_x1);
        s2 += (x2[i] - side.mean_x2) * (x2[i] - side.mean_x2);
    }
    side.sd_x1 = std::sqrt(s1 / (side.reps - 1));
    side.sd_x2 = std::sqrt(s2 / (side.reps - 1));
    return side;
}

bool ci95_overlap(double mean_a, double sd_a, int n_a, double mean_b, double sd_b, int n_b) {
    const double lo_a = mean_a - 1.96 * sd_a / std::sqrt(n_a);
    const double hi_a = mean_a + 1.96 * sd_a / std::sqrt(n_a);
    const double lo_b = mean_b - 1.96 * sd_b / std::sqrt(n_b);
    const double hi_b = mean_b + 1.96 * sd_b / std::sqrt(n_b);
    return lo_a <= hi_b && lo_b <= hi_a;
}

} // namespace

CtmcVsSdeReport ctmc_vs_sde(const CtmcVsSdeConfig& config, std::uint64_t seed) {
    const int root = static_cast<int>(std::llround(std::sqrt(static_cast<double>(config.n))));
    if (root * root != config.n) {
        throw std::invalid_argument("ctmc_vs_sde: N must be a perfect square");
    }
    if (config.reps < 2) throw std::invalid_argument("ctmc_vs_sde: need at least two reps per side");
    if (config.x1_0 > 0.0 || config.x2_0 < 0.0) {
        throw std::invalid_argument("ctmc_vs_sde: x0 must satisfy x1 <= 0 <= x2");
    }
    if (config.antithetic && config.reps % 2 != 0) {
        throw std::invalid_argument("ctmc_vs_sde: antithetic pairing needs an even rep count");
    }

    const PolicySpec policy = parse_policy(config.policy, config.n);
    const OccupancyVector init =
        halfin_whitt_init(config.n, -config.x1_0, config.x2_0, policy.cap());
    const double root_n = std::sqrt(static_cast<double>(config.n));
    const double x1_init = (init.level_count(1) - config.n) / root_n;
    const double x2_init = init.level_count(2) / root_n;
    if (std::abs(x1_init - config.x1_0) > 1e-12 || std::abs(x2_init - config.x2_0) > 1e-12) {
        throw std::invalid_argument(
            "ctmc_vs_sde: x0 does not correspond to an exact occupancy state at this N");
    }

    std::vector<double> ctmc_x1;
    std::vector<double> ctmc_x2;
    const std::vector<PolicySpec> policies{policy};
    const std::vector<OccupancyVector> inits{init};
    for (int rep = 0; rep < config.reps; ++rep) {
        const std::uint64_t rep_seed =
            substream_seed(seed, "ctmc-vs-sde/engine", static_cast<std::uint64_t>(rep));
        const auto paths =
            run_coupled(policies, config.n, config.beta, config.horizon, inits, rep_seed);
        const auto& last = paths[0].points.back();
        const auto q2 = last.q.size() > 1 ? last.q[1] : 0;
        ctmc_x1.push_back((last.q[0] - config.n) / root_n);
        ctmc_x2.push_back(q2 / root_n);
    }

    std::vector<double> sde_x1;
    std::vector<double> sde_x2;
    for (int rep = 0; rep < config.reps; ++rep) {
        const std::uint64_t pair_index =
            config.antithetic ? static_cast<std::uint64_t>(rep / 2) : static_cast<std::uint64_t>(rep);
        const std::uint64_t rep_seed = substream_seed(seed, "ctmc-vs-sde/diffusion", pair_index);
        IntegrateOptions options;
        options.antithetic = config.antithetic && rep % 2 == 1;
        const DiffusionPath path = integrate(config.beta, config.x1_0, config.x2_0,
                                             config.horizon, config.dt, rep_seed, options);
        const DiffusionState& last = path.at_time(config.horizon);
        sde_x1.push_back(last.x1);
        sde_x2.push_back(last.x2);
    }

    CtmcVsSdeReport report;
    report.ctmc = summarize(ctmc_x1, ctmc_x2);
    report.sde = summarize(sde_x1, sde_x2);
    report.dmean_x1 = std::abs(report.ctmc.mean_x1 - report.sde.mean_x1);
    report.dmean_x2 = std::abs(report.ctmc.mean_x2 - report.sde.mean_x2);
    report.ci95_overlap_x1 = ci95_overlap(report.ctmc.mean_x1, report.ctmc.sd_x1, report.ctmc.reps,
                                          report.sde.mean_x1, report.sde.sd_x1, report.sde.reps);
    report.ci95_overlap_x2 = ci95_overlap(report.ctmc.mean_x2, report.ctmc.sd_x2, report.ctmc.reps,
                                          report.sde.mean_x2, report.sde.sd_x2, report.sde.reps);
    return report;
}

} // namespace balsim
