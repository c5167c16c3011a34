#pragma once

#include "balsim/occupancy.hpp"
#include "balsim/policy.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace balsim {

enum class EventKind { initial, arrival, potential_departure };

// One epoch of the shared event stream. Every coupled system sees the same
// stream: arrivals carry one permutation draw (as a seed, or an explicit
// permutation for scripted runs), potential departures carry one uniform
// stack position.
struct CoupledEvent {
    double time = 0.0;
    EventKind kind = EventKind::arrival;
    std::uint64_t perm_seed = 0;
    std::vector<int> perm; // non-empty only in scripted mode
    int departure_pos = 0;
};

// Merged exponential(lambda_N + N) clock thinned into arrivals with
// probability lambda_N / (lambda_N + N), lambda_N = N - beta*sqrt(N).
// Independent of the system set, so coupling more systems onto the stream
// never perturbs it.
std::vector<CoupledEvent> generate_events(int n_servers, double beta, double horizon,
                                          std::uint64_t seed);

// Line format: "<time> arr [p1,p2,...]" or "<time> dep <k>"; '#' comments
// and blank lines are skipped. Times must strictly increase. An arrival
// without an explicit permutation uses the identity permutation.
std::vector<CoupledEvent> parse_scripted_events(std::istream& in, int n_servers);

struct PathPoint {
    double time = 0.0;
    std::vector<int> q;
    long long overflows = 0;
    EventKind kind = EventKind::initial;
};

// Piecewise-constant trajectory of (Q, L) for one policy under one event
// stream. Every epoch is recorded, including no-op potential departures,
// so coupled paths share their epoch sets exactly.
struct SystemPath {
    PolicySpec policy;
    int n_servers = 0;
    double beta = 0.0;
    std::vector<PathPoint> points; // points[0] is the initial state

    long long total_overflows() const { return points.back().overflows; }
};

// Drive all systems through one shared event stream. At an arrival each
// system dispatches with its own minimum queue length against the shared
// permutation draw; at a potential departure each removes at the shared
// position. Paths come back in policy order.
std::vector<SystemPath> run_events(std::span<const PolicySpec> policies,
                                   std::span<const CoupledEvent> events,
                                   std::span<const OccupancyVector> init, double beta = 0.0);

std::vector<SystemPath> run_coupled(std::span<const PolicySpec> policies, int n_servers,
                                    double beta, double horizon,
                                    std::span<const OccupancyVector> init, std::uint64_t seed);

// Diffusion-scaled view: X_1 = (Q_1 - N)/sqrt(N), X_i = Q_i/sqrt(N).
struct ScaledPath {
    int n_servers = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> x; // x[j][i-1] = X_i at epoch j

    double sup_coordinate(int coordinate) const; // sup_t X_i(t), 1-indexed i
};

ScaledPath scale(const SystemPath& path);

// Initial state with ~gamma1*sqrt(N) vacant servers and ~gamma2*sqrt(N)
// servers holding two tasks; X_1(0) -> -gamma1 and X_2(0) -> gamma2.
OccupancyVector halfin_whitt_init(int n_servers, double gamma1, double gamma2, int cap = 2);

// Pathwise check of the three coupled-ordering claims for paths (a, b)
// from one run: (i) component-wise dominance, (ii) accepted-plus-dropped
// totals ordered the other way, (iii) the overflow gap bounding B's tail
// occupancy beyond A's buffer.
struct Prop2Report {
    bool hypothesis_ok = true;
    std::string hypothesis_note;
    bool ordering_ok = true;
    bool totals_ok = true;
    bool delta_ok = true;
    std::optional<double> first_violation_time;
    std::string first_violation;

    bool pass() const { return ordering_ok && totals_ok && delta_ok; }
};

Prop2Report check_prop2(const SystemPath& a, const SystemPath& b);

} // namespace balsim
