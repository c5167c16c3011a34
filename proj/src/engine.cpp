#include "balsim/engine.hpp"

#include "balsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace balsim {

std::vector<CoupledEvent> generate_events(int n_servers, double beta, double horizon,
                                          std::uint64_t seed) {
    if (n_servers < 1) throw std::invalid_argument("generate_events: n_servers must be >= 1");
    if (beta <= 0.0) throw std::invalid_argument("generate_events: beta must be positive");
    if (horizon < 0.0) throw std::invalid_argument("generate_events: horizon must be >= 0");
    const double lambda = n_servers - beta * std::sqrt(static_cast<double>(n_servers));
    if (lambda <= 0.0) {
        throw std::invalid_argument("generate_events: arrival rate N - beta*sqrt(N) must be positive");
    }
    const double total_rate = lambda + n_servers;
    const double arrival_fraction = lambda / total_rate;

    Rng time_rng(substream_seed(seed, "engine/event-times"));
    Rng kind_rng(substream_seed(seed, "engine/event-kinds"));
    Rng perm_rng(substream_seed(seed, "engine/perm-seeds"));
    Rng dep_rng(substream_seed(seed, "engine/departure-positions"));

    std::vector<CoupledEvent> events;
    double t = 0.0;
    while (true) {
        t += time_rng.exponential(total_rate);
        if (t > horizon) break;
        CoupledEvent ev;
        ev.time = t;
        if (kind_rng.bernoulli(arrival_fraction)) {
            ev.kind = EventKind::arrival;
            ev.perm_seed = perm_rng.next_u64();
        } else {
            ev.kind = EventKind::potential_departure;
            ev.departure_pos = dep_rng.uniform_int(1, n_servers);
        }
        events.push_back(std::move(ev));
    }
    return events;
}

std::vector<CoupledEvent> parse_scripted_events(std::istream& in, int n_servers) {
    std::vector<CoupledEvent> events;
    std::string line;
    int line_no = 0;
    double last_time = 0.0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fail = [&](const std::string& what) {
            throw ParseError("scripted events line " + std::to_string(line_no) + ": " + what);
        };
        std::istringstream fields(line);
        std::string first;
        if (!(fields >> first) || first.starts_with('#')) continue;

        CoupledEvent ev;
        try {
            ev.time = std::stod(first);
        } catch (const std::exception&) {
            fail("bad time '" + first + "'");
        }
        if (!events.empty() && ev.time <= last_time) fail("times must strictly increase");
        last_time = ev.time;

        std::string kind;
        if (!(fields >> kind)) fail("missing event kind");
        if (kind == "arr") {
            ev.kind = EventKind::arrival;
            std::string perm_text;
            if (fields >> perm_text) {
                std::vector<int> sigma;
                for (std::string_view token : [&] {
                         std::vector<std::string_view> parts;
                         std::string_view s = perm_text;
                         std::size_t start = 0;
                         while (true) {
                             const auto pos = s.find(',', start);
                             parts.push_back(s.substr(start, pos - start));
                             if (pos == std::string_view::npos) return parts;
                             start = pos + 1;
                         }
                     }()) {
                    try {
                        sigma.push_back(std::stoi(std::string(token)));
                    } catch (const std::exception&) {
                        fail("bad permutation entry '" + std::string(token) + "'");
                    }
                }
                if (static_cast<int>(sigma.size()) != n_servers) {
                    fail("permutation must list all N entries");
                }
                ev.perm = std::move(sigma);
            } else {
                ev.perm.resize(static_cast<std::size_t>(n_servers));
                std::iota(ev.perm.begin(), ev.perm.end(), 1);
            }
        } else if (kind == "dep") {
            ev.kind = EventKind::potential_departure;
            if (!(fields >> ev.departure_pos)) fail("departure needs a position");
            if (ev.departure_pos < 1 || ev.departure_pos > n_servers) {
                fail("departure position out of 1..N");
            }
        } else {
            fail("unknown event kind '" + kind + "'");
        }
        events.push_back(std::move(ev));
    }
    return events;
}

std::vector<SystemPath> run_events(std::span<const PolicySpec> policies,
                                   std::span<const CoupledEvent> events,
                                   std::span<const OccupancyVector> init, double beta) {
    if (policies.empty()) throw std::invalid_argument("run_events: no policies given");
    if (init.size() != policies.size()) {
        throw std::invalid_argument("run_events: need one initial state per policy");
    }
    const int n = policies.front().n_servers();
    std::vector<OccupancyVector> state;
    state.reserve(policies.size());
    std::vector<SystemPath> paths;
    paths.reserve(policies.size());
    for (std::size_t s = 0; s < policies.size(); ++s) {
        if (policies[s].n_servers() != n || init[s].n_servers() != n) {
            throw std::invalid_argument("run_events: all systems must share the server count");
        }
        if (init[s].cap() != policies[s].cap()) {
            throw std::invalid_argument("run_events: initial state buffer differs from policy buffer");
        }
        state.push_back(init[s]);
        SystemPath path{policies[s], n, beta, {}};
        path.points.reserve(events.size() + 1);
        path.points.push_back({0.0, init[s].counts(), 0, EventKind::initial});
        paths.push_back(std::move(path));
    }

    for (const CoupledEvent& ev : events) {
        if (ev.kind == EventKind::arrival) {
            PermutationDraw draw = ev.perm.empty()
                                       ? PermutationDraw(n, ev.perm_seed)
                                       : PermutationDraw::from_permutation(ev.perm);
            for (std::size_t s = 0; s < state.size(); ++s) {
                auto& path = paths[s];
                long long overflows = path.points.back().overflows;
                if (const auto target = dispatch(policies[s], state[s], draw)) {
                    if (state[s].add_at(*target)) ++overflows;
                } else {
                    ++overflows;
                }
                path.points.push_back({ev.time, state[s].counts(), overflows, ev.kind});
            }
        } else {
            for (std::size_t s = 0; s < state.size(); ++s) {
                state[s].remove_at(ev.departure_pos);
                auto& path = paths[s];
                path.points.push_back(
                    {ev.time, state[s].counts(), path.points.back().overflows, ev.kind});
            }
        }
    }
    return paths;
}

std::vector<SystemPath> run_coupled(std::span<const PolicySpec> policies, int n_servers,
                                    double beta, double horizon,
                                    std::span<const OccupancyVector> init, std::uint64_t seed) {
    for (const auto& p : policies) {
        if (p.n_servers() != n_servers) {
            throw std::invalid_argument("run_coupled: policy server count differs from N");
        }
    }
    const auto events = generate_events(n_servers, beta, horizon, seed);
    return run_events(policies, events, init, beta);
}

double ScaledPath::sup_coordinate(int coordinate) const {
    if (coordinate < 1) throw std::out_of_range("coordinate must be >= 1");
    double sup = -std::numeric_limits<double>::infinity();
    for (const auto& row : x) {
        const double v =
            coordinate <= static_cast<int>(row.size()) ? row[static_cast<std::size_t>(coordinate - 1)] : 0.0;
        sup = std::max(sup, v);
    }
    return sup;
}

ScaledPath scale(const SystemPath& path) {
    ScaledPath scaled;
    scaled.n_servers = path.n_servers;
    const double root_n = std::sqrt(static_cast<double>(path.n_servers));
    std::size_t width = 0;
    for (const auto& pt : path.points) width = std::max(width, pt.q.size());
    scaled.times.reserve(path.points.size());
    scaled.x.reserve(path.points.size());
    for (const auto& pt : path.points) {
        scaled.times.push_back(pt.time);
        std::vector<double> row(width, 0.0);
        for (std::size_t i = 0; i < width; ++i) {
            const int q = i < pt.q.size() ? pt.q[i] : 0;
            row[i] = i == 0 ? (q - path.n_servers) / root_n : q / root_n;
        }
        scaled.x.push_back(std::move(row));
    }
    return scaled;
}

OccupancyVector halfin_whitt_init(int n_servers, double gamma1, double gamma2, int cap) {
    if (gamma1 < 0.0 || gamma2 < 0.0) {
        throw std::invalid_argument("halfin_whitt_init: gammas must be non-negative");
    }
    const double root_n = std::sqrt(static_cast<double>(n_servers));
    const int vacant = static_cast<int>(std::floor(gamma1 * root_n));
    const int doubled = static_cast<int>(std::floor(gamma2 * root_n));
    if (vacant + doubled > n_servers) {
        throw std::invalid_argument("halfin_whitt_init: gamma1, gamma2 infeasible for this N");
    }
    std::vector<int> counts;
    if (cap != kUnboundedCap) counts.resize(static_cast<std::size_t>(cap), 0);
    else counts.resize(2, 0);
    counts[0] = n_servers - vacant;
    counts[1] = doubled;
    return {n_servers, cap, std::move(counts)};
}

namespace {

long long tail_beyond(const PathPoint& pt, int cap_a) {
    long long tail = 0;
    for (std::size_t i = static_cast<std::size_t>(cap_a); i < pt.q.size(); ++i) tail += pt.q[i];
    return tail;
}

bool pointwise_dominates(const PathPoint& a, const PathPoint& b) {
    const std::size_t len = std::max(a.q.size(), b.q.size());
    for (std::size_t i = 0; i < len; ++i) {
        const int qa = i < a.q.size() ? a.q[i] : 0;
        const int qb = i < b.q.size() ? b.q[i] : 0;
        if (qa > qb) return false;
    }
    return true;
}

} // namespace

Prop2Report check_prop2(const SystemPath& a, const SystemPath& b) {
    if (a.n_servers != b.n_servers || a.points.size() != b.points.size()) {
        throw std::invalid_argument("check_prop2: paths are not from one coupled run");
    }
    for (std::size_t j = 0; j < a.points.size(); ++j) {
        if (a.points[j].time != b.points[j].time || a.points[j].kind != b.points[j].kind) {
            throw std::invalid_argument("check_prop2: paths are not from one coupled run");
        }
    }

    Prop2Report report;
    std::ostringstream note;
    if (!prop2_admissible(a.policy, b.policy)) {
        report.hypothesis_ok = false;
        note << "policies fail the admissibility condition; ";
    }
    if (!pointwise_dominates(a.points.front(), b.points.front())) {
        report.hypothesis_ok = false;
        note << "initial occupancy not ordered; ";
    }
    const int cap_a = a.policy.is_unbounded() ? static_cast<int>(a.points.front().q.size())
                                              : a.policy.cap();
    {
        const auto& ia = a.points.front();
        const auto& ib = b.points.front();
        const long long sum_a = std::accumulate(ia.q.begin(), ia.q.end(), 0LL);
        const long long sum_b = std::accumulate(ib.q.begin(), ib.q.end(), 0LL);
        if (sum_a < sum_b) {
            report.hypothesis_ok = false;
            note << "initial totals not ordered; ";
        }
        if (tail_beyond(ib, cap_a) > 0) {
            report.hypothesis_ok = false;
            note << "initial occupancy of B beyond A's buffer; ";
        }
    }
    report.hypothesis_note = note.str();

    const auto record = [&](double time, const std::string& what) {
        if (!report.first_violation_time) {
            report.first_violation_time = time;
            report.first_violation = what;
        }
    };

    for (std::size_t j = 0; j < a.points.size(); ++j) {
        const auto& pa = a.points[j];
        const auto& pb = b.points[j];
        if (report.ordering_ok && !pointwise_dominates(pa, pb)) {
            report.ordering_ok = false;
            record(pa.time, "component ordering");
        }
        const long long sum_a = std::accumulate(pa.q.begin(), pa.q.end(), 0LL);
        const long long sum_b = std::accumulate(pb.q.begin(), pb.q.end(), 0LL);
        if (report.totals_ok && sum_a + pa.overflows < sum_b + pb.overflows) {
            report.totals_ok = false;
            record(pa.time, "occupancy-plus-overflow totals");
        }
        if (report.delta_ok && pa.overflows - pb.overflows < tail_beyond(pb, cap_a)) {
            report.delta_ok = false;
            record(pa.time, "overflow gap vs tail occupancy");
        }
    }
    return report;
}

} // namespace balsim
