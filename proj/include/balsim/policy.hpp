#pragma once

#include "balsim/occupancy.hpp"
#include "balsim/rng.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace balsim {

// Raised by the policy-descriptor and config parsers; the CLI maps it to a
// dedicated exit code.
class ParseError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Selection-size vector (d_0, ..., d_{b-1}): an arriving task goes to the
// best of d_k uniformly sampled servers when the minimum queue length is k.
// Finite-cap specs store exactly cap sizes; unbounded specs store a prefix
// whose last entry repeats at every deeper level.
class PolicySpec {
  public:
    static PolicySpec jsq(int n_servers, int cap = 2);
    static PolicySpec jiq(int n_servers, int cap = 2);
    static PolicySpec jiq_d(int n_servers, int d, int cap = 2);
    static PolicySpec jsq_d(int n_servers, int d, int cap = 2);
    static PolicySpec custom(int n_servers, std::vector<int> selection_sizes, int cap,
                             std::string name = "");

    int n_servers() const { return n_servers_; }
    int cap() const { return cap_; }
    bool is_unbounded() const { return cap_ == kUnboundedCap; }

    // d_k for minimum queue length k (0-indexed level).
    int selection_size(int level) const;

    const std::vector<int>& selection_sizes() const { return sizes_; }

    // Schemes with d_0 = N always serve an idle server first; only those
    // share the common diffusion limit.
    bool in_pi_class() const { return sizes_.front() == n_servers_; }

    const std::string& name() const { return name_; }

    bool operator==(const PolicySpec& other) const {
        return n_servers_ == other.n_servers_ && cap_ == other.cap_ && sizes_ == other.sizes_;
    }

  private:
    PolicySpec(int n_servers, int cap, std::vector<int> sizes, std::string name);

    int n_servers_;
    int cap_;
    std::vector<int> sizes_;
    std::string name_;
};

// Descriptor syntax:
//   jsq | jiq | jiq:<d> | pi:<d0>,<d1>,...[:cap=<b>|cap=inf]
// "N" may stand for any <d>, meaning the full server count. jsq/jiq accept
// the cap suffix too; the default cap is 2. With an explicit finite cap the
// size list is padded by repeating its last entry.
PolicySpec parse_policy(std::string_view descriptor, int n_servers);

// Prefix minima sigma_(1) >= sigma_(2) >= ... of one uniform random
// permutation of {1..N}, materialized lazily: extending from sigma_(i) = m
// jumps below m with probability (m-1)/(N-i), landing uniformly on
// {1..m-1}. Querying the full prefix short-circuits to 1 without touching
// the chain. One draw serves one arrival across all coupled systems.
class PermutationDraw {
  public:
    PermutationDraw(int n_servers, std::uint64_t seed);

    // Fixed permutation, fully materialized; for scripted runs and tests.
    static PermutationDraw from_permutation(const std::vector<int>& sigma);

    int n_servers() const { return n_servers_; }

    // sigma_(m) = min of the first m permutation entries.
    int prefix_min(int m);

    // Number of materialized prefix entries (diagnostic).
    int materialized() const { return static_cast<int>(minima_.size()); }

  private:
    explicit PermutationDraw(std::vector<int> minima);

    int n_servers_;
    std::vector<int> minima_;
    std::optional<Rng> rng_;
};

// Target stack position for one arrival, or nullopt when every server
// already holds cap tasks and the task is discarded outright. The returned
// position feeds OccupancyVector::add_at, which may still drop the item.
std::optional<int> dispatch(const PolicySpec& policy, const OccupancyVector& q,
                            PermutationDraw& draw);

// Hypothesis of the pathwise-ordering comparison for schemes a (buffer b)
// vs b (buffer b' >= b): equal selection sizes d on levels 0..b-2, a's last
// size at most b's size at level b-1, and d = N or d <= that size. Returns
// false (rather than throwing) when the buffer sizes are ordered the wrong
// way round.
bool prop2_admissible(const PolicySpec& a, const PolicySpec& b);

} // namespace balsim
