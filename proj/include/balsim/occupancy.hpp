#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace balsim {

// Buffer size standing in for "no buffer limit". An unbounded vector grows
// its stored counts on demand; levels past the stored length are zero.
inline constexpr int kUnboundedCap = std::numeric_limits<int>::max();

// Occupancy counts Q = (Q_1, ..., Q_b) where Q_i is the number of servers
// holding at least i tasks. Server identities are never stored; the vector
// is the whole state up to relabeling. Invariant maintained throughout:
//   N >= Q_1 >= Q_2 >= ... >= Q_b >= 0.
class OccupancyVector {
  public:
    // Empty system: all servers idle.
    OccupancyVector(int n_servers, int cap);

    // Explicit counts; validates the chain invariant.
    OccupancyVector(int n_servers, int cap, std::vector<int> counts);

    int n_servers() const { return n_servers_; }
    int cap() const { return cap_; }
    bool is_unbounded() const { return cap_ == kUnboundedCap; }

    // Q_i for 1-indexed level i; zero past the stored length.
    int level_count(int level) const;

    // Stored counts. Length == cap for finite cap; dynamic when unbounded.
    const std::vector<int>& counts() const { return counts_; }

    // Height of the c-th stack when servers are sorted by queue length:
    // max{ i : Q_i >= N - c + 1 }, or 0 when no level qualifies.
    int index_of_stack(int c) const;

    // Queue length of the least-loaded server: #{ i : Q_i == N }.
    int min_stack_height() const;

    // Remove one item from the c-th sorted stack (no-op when it is empty).
    void remove_at(int k);

    // Add one item to the l-th sorted stack. Returns true when the item
    // lands on a full stack and is dropped.
    bool add_at(int l);

    long long total_tasks() const;

    bool operator==(const OccupancyVector& other) const = default;

    std::string to_string() const;

  private:
    int n_servers_;
    int cap_;
    std::vector<int> counts_;
};

// Component-wise a <= b after zero-padding to the longer cap.
// Both vectors must describe the same number of servers.
bool dominates(const OccupancyVector& a, const OccupancyVector& b);

// Parameters of one coupled step over a pair of ensembles: removal position
// k, shared addition target l, and the per-ensemble targets l_A / l_B used
// when the (ensemble-A) minimum height has reached cap-1.
struct RuleParams {
    int k = 1;
    int l = 1;
    int l_a = 1;
    int l_b = 1;

    // Ordering is guaranteed only under this condition; apply_rule accepts
    // inadmissible parameters so counterexample searches can probe them.
    bool admissible() const { return l_a >= l_b && (l == 1 || l >= l_b); }
};

enum class StepKind {
    removal,        // synchronized removal at position k in both ensembles
    removal_a_only, // removal at k in A only; stated variant, engine never emits it
    addition,
};

// One coupled step over ensembles (a, b) with a.cap() <= b.cap(). Addition
// branches on the minimum stack height against a.cap()-1 in both ensembles;
// when B's minimum is at or above a.cap() the item goes to stack l_b.
std::pair<OccupancyVector, OccupancyVector> apply_rule(const OccupancyVector& a,
                                                       const OccupancyVector& b,
                                                       StepKind step,
                                                       const RuleParams& params);

// ---------------------------------------------------------------------------
// Dominance-preservation checks (exhaustive and randomized).

// All occupancy vectors for a given (N, cap), in lexicographic order of the
// counts sequence. Also the enumeration backing the oracle state space.
std::vector<OccupancyVector> enumerate_occupancy_states(int n_servers, int cap);

struct DominanceCounterexample {
    OccupancyVector a;
    OccupancyVector b;
    StepKind step;
    RuleParams params;
    std::string describe() const;
};

struct ExhaustiveDominanceResult {
    long long cases = 0;
    long long violations = 0;
    std::optional<DominanceCounterexample> first_violation;
};

// Every ordered pair a <= b with n <= max_n, a.cap <= max_cap_a,
// a.cap <= b.cap <= max_cap_b, every step kind, every admissible RuleParams.
ExhaustiveDominanceResult exhaustive_rule_dominance(int max_n, int max_cap_a, int max_cap_b);

struct FuzzDominanceResult {
    long long trials = 0;
    long long violations = 0;
    std::optional<DominanceCounterexample> first_violation;
};

// Randomized trials at fixed N with caps in [2, max_cap]. With
// admissible_only the parameters are drawn admissible and any violation is
// a bug; without it the draw is restricted to inadmissible parameters and
// violations are expected (they show the side conditions bind).
FuzzDominanceResult fuzz_rule_dominance(int n_servers, int max_cap, long long trials,
                                        std::uint64_t seed, bool admissible_only);

} // namespace balsim
