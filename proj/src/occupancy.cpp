#include "balsim/occupancy.hpp"

#include "balsim/rng.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace balsim {

namespace {

void validate_chain(int n_servers, const std::vector<int>& counts) {
    int prev = n_servers;
    for (int c : counts) {
        if (c < 0 || c > prev) {
            throw std::invalid_argument("occupancy counts violate N >= Q1 >= ... >= Qb >= 0");
        }
        prev = c;
    }
}

} // namespace

OccupancyVector::OccupancyVector(int n_servers, int cap)
    : n_servers_(n_servers), cap_(cap) {
    if (n_servers < 1) throw std::invalid_argument("n_servers must be >= 1");
    if (cap < 2) throw std::invalid_argument("cap must be >= 2");
    if (cap != kUnboundedCap) counts_.assign(static_cast<std::size_t>(cap), 0);
}

OccupancyVector::OccupancyVector(int n_servers, int cap, std::vector<int> counts)
    : n_servers_(n_servers), cap_(cap), counts_(std::move(counts)) {
    if (n_servers < 1) throw std::invalid_argument("n_servers must be >= 1");
    if (cap < 2) throw std::invalid_argument("cap must be >= 2");
    if (cap != kUnboundedCap) {
        if (static_cast<int>(counts_.size()) > cap) {
            throw std::invalid_argument("more counts than the buffer size allows");
        }
        counts_.resize(static_cast<std::size_t>(cap), 0);
    }
    validate_chain(n_servers_, counts_);
}

int OccupancyVector::level_count(int level) const {
    if (level < 1) throw std::out_of_range("level must be >= 1");
    if (level > static_cast<int>(counts_.size())) return 0;
    return counts_[static_cast<std::size_t>(level - 1)];
}

int OccupancyVector::index_of_stack(int c) const {
    if (c < 1 || c > n_servers_) throw std::out_of_range("stack position out of 1..N");
    const int threshold = n_servers_ - c + 1;
    int level = 0;
    // Counts are non-increasing, so the qualifying levels form a prefix.
    for (int i = 0; i < static_cast<int>(counts_.size()) && counts_[i] >= threshold; ++i) {
        level = i + 1;
    }
    return level;
}

int OccupancyVector::min_stack_height() const {
    int height = 0;
    for (int i = 0; i < static_cast<int>(counts_.size()) && counts_[i] == n_servers_; ++i) {
        height = i + 1;
    }
    return height;
}

void OccupancyVector::remove_at(int k) {
    const int level = index_of_stack(k);
    if (level >= 1) {
        --counts_[static_cast<std::size_t>(level - 1)];
    }
}

bool OccupancyVector::add_at(int l) {
    const int level = index_of_stack(l);
    if (level >= cap_) return true; // lands on a full stack, dropped
    if (level == static_cast<int>(counts_.size())) counts_.push_back(0);
    ++counts_[static_cast<std::size_t>(level)];
    return false;
}

long long OccupancyVector::total_tasks() const {
    return std::accumulate(counts_.begin(), counts_.end(), 0LL);
}

std::string OccupancyVector::to_string() const {
    std::ostringstream out;
    out << "(";
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        if (i) out << ",";
        out << counts_[i];
    }
    out << ")";
    return out.str();
}

bool dominates(const OccupancyVector& a, const OccupancyVector& b) {
    if (a.n_servers() != b.n_servers()) {
        throw std::invalid_argument("dominates: vectors describe different numbers of servers");
    }
    const std::size_t len = std::max(a.counts().size(), b.counts().size());
    for (std::size_t i = 0; i < len; ++i) {
        const int qa = i < a.counts().size() ? a.counts()[i] : 0;
        const int qb = i < b.counts().size() ? b.counts()[i] : 0;
        if (qa > qb) return false;
    }
    return true;
}

std::pair<OccupancyVector, OccupancyVector> apply_rule(const OccupancyVector& a,
                                                       const OccupancyVector& b,
                                                       StepKind step,
                                                       const RuleParams& params) {
    if (a.n_servers() != b.n_servers()) {
        throw std::invalid_argument("apply_rule: ensembles must share the number of stacks");
    }
    if (a.cap() > b.cap()) {
        throw std::invalid_argument("apply_rule: ensemble A may not have the larger capacity");
    }
    OccupancyVector out_a = a;
    OccupancyVector out_b = b;
    switch (step) {
    case StepKind::removal:
        out_a.remove_at(params.k);
        out_b.remove_at(params.k);
        break;
    case StepKind::removal_a_only:
        out_a.remove_at(params.k);
        break;
    case StepKind::addition: {
        const int cap_a = a.cap();
        if (out_a.min_stack_height() < cap_a - 1) {
            out_a.add_at(params.l);
        } else {
            out_a.add_at(params.l_a);
        }
        const int min_b = out_b.min_stack_height();
        if (min_b < cap_a - 1) {
            out_b.add_at(params.l);
        } else {
            // Covers both min == cap_a - 1 and min >= cap_a; in the latter
            // case any target preserves the ordering and l_b is the fixed
            // canonical choice.
            out_b.add_at(params.l_b);
        }
        break;
    }
    }
    return {std::move(out_a), std::move(out_b)};
}

std::vector<OccupancyVector> enumerate_occupancy_states(int n_servers, int cap) {
    if (cap == kUnboundedCap) {
        throw std::invalid_argument("cannot enumerate states of an unbounded buffer");
    }
    std::vector<OccupancyVector> states;
    std::vector<int> current(static_cast<std::size_t>(cap), 0);
    const auto emit = [&](auto&& self, int level, int max_value) -> void {
        if (level == cap) {
            states.emplace_back(n_servers, cap, current);
            return;
        }
        for (int v = 0; v <= max_value; ++v) {
            current[static_cast<std::size_t>(level)] = v;
            self(self, level + 1, v);
        }
    };
    emit(emit, 0, n_servers);
    return states;
}

std::string DominanceCounterexample::describe() const {
    std::ostringstream out;
    out << "A=" << a.to_string() << " B=" << b.to_string() << " N=" << a.n_servers()
        << " caps=(" << a.cap() << "," << b.cap() << ") step=";
    switch (step) {
    case StepKind::removal: out << "removal"; break;
    case StepKind::removal_a_only: out << "removal_a_only"; break;
    case StepKind::addition: out << "addition"; break;
    }
    out << " params(k=" << params.k << ",l=" << params.l << ",lA=" << params.l_a
        << ",lB=" << params.l_b << ")";
    return out.str();
}

namespace {

bool step_preserves(const OccupancyVector& a, const OccupancyVector& b, StepKind step,
                    const RuleParams& params) {
    auto [na, nb] = apply_rule(a, b, step, params);
    return dominates(na, nb);
}

} // namespace

ExhaustiveDominanceResult exhaustive_rule_dominance(int max_n, int max_cap_a, int max_cap_b) {
    ExhaustiveDominanceResult result;
    for (int n = 1; n <= max_n; ++n) {
        for (int cap_a = 2; cap_a <= max_cap_a; ++cap_a) {
            const auto states_a = enumerate_occupancy_states(n, cap_a);
            for (int cap_b = cap_a; cap_b <= max_cap_b; ++cap_b) {
                const auto states_b = enumerate_occupancy_states(n, cap_b);
                for (const auto& a : states_a) {
                    for (const auto& b : states_b) {
                        if (!dominates(a, b)) continue;
                        for (int k = 1; k <= n; ++k) {
                            RuleParams params{.k = k, .l = 1, .l_a = 1, .l_b = 1};
                            for (StepKind step : {StepKind::removal, StepKind::removal_a_only}) {
                                ++result.cases;
                                if (!step_preserves(a, b, step, params)) {
                                    ++result.violations;
                                    if (!result.first_violation) {
                                        result.first_violation =
                                            DominanceCounterexample{a, b, step, params};
                                    }
                                }
                            }
                        }
                        for (int l = 1; l <= n; ++l) {
                            for (int la = 1; la <= n; ++la) {
                                for (int lb = 1; lb <= n; ++lb) {
                                    RuleParams params{.k = 1, .l = l, .l_a = la, .l_b = lb};
                                    if (!params.admissible()) continue;
                                    ++result.cases;
                                    if (!step_preserves(a, b, StepKind::addition, params)) {
                                        ++result.violations;
                                        if (!result.first_violation) {
                                            result.first_violation = DominanceCounterexample{
                                                a, b, StepKind::addition, params};
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return result;
}

namespace {

// Random state dominated by an upper state: sample level by level under
// both the chain and the component-wise constraints.
OccupancyVector random_dominated_state(const OccupancyVector& upper, int cap, Rng& rng) {
    std::vector<int> counts(static_cast<std::size_t>(cap), 0);
    int prev = upper.n_servers();
    for (int i = 0; i < cap; ++i) {
        const int hi = std::min(prev, upper.level_count(i + 1));
        counts[static_cast<std::size_t>(i)] = rng.uniform_int(0, hi);
        prev = counts[static_cast<std::size_t>(i)];
    }
    return {upper.n_servers(), cap, std::move(counts)};
}

OccupancyVector random_state(int n_servers, int cap, Rng& rng) {
    std::vector<int> counts(static_cast<std::size_t>(cap), 0);
    int prev = n_servers;
    for (int i = 0; i < cap; ++i) {
        counts[static_cast<std::size_t>(i)] = rng.uniform_int(0, prev);
        prev = counts[static_cast<std::size_t>(i)];
    }
    return {n_servers, cap, std::move(counts)};
}

} // namespace

FuzzDominanceResult fuzz_rule_dominance(int n_servers, int max_cap, long long trials,
                                        std::uint64_t seed, bool admissible_only) {
    FuzzDominanceResult result;
    Rng rng(substream_seed(seed, admissible_only ? "fuzz/admissible" : "fuzz/inadmissible"));
    for (long long trial = 0; trial < trials; ++trial) {
        const int cap_a = rng.uniform_int(2, max_cap);
        const int cap_b = rng.uniform_int(cap_a, max_cap);
        const OccupancyVector b = random_state(n_servers, cap_b, rng);
        const OccupancyVector a = random_dominated_state(b, cap_a, rng);

        RuleParams params;
        params.k = rng.uniform_int(1, n_servers);
        if (admissible_only) {
            params.l_b = rng.uniform_int(1, n_servers);
            params.l_a = rng.uniform_int(params.l_b, n_servers);
            params.l = rng.bernoulli(0.5) ? 1 : rng.uniform_int(params.l_b, n_servers);
        } else {
            do {
                params.l = rng.uniform_int(1, n_servers);
                params.l_a = rng.uniform_int(1, n_servers);
                params.l_b = rng.uniform_int(1, n_servers);
            } while (params.admissible());
        }

        StepKind step = StepKind::addition;
        if (admissible_only) {
            // Removals are included for coverage; additions carry the risk.
            const int pick = rng.uniform_int(0, 9);
            if (pick == 0) step = StepKind::removal;
            else if (pick == 1) step = StepKind::removal_a_only;
        }

        ++result.trials;
        if (!step_preserves(a, b, step, params)) {
            ++result.violations;
            if (!result.first_violation) {
                result.first_violation = DominanceCounterexample{a, b, step, params};
            }
        }
    }
    return result;
}

} // namespace balsim
