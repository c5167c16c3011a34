#pragma once

#include "balsim/engine.hpp"
#include "balsim/occupancy.hpp"
#include "balsim/policy.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace balsim {

class CapacityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
  public:
    NumericalError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

  private:
    double residual_;
};

// All occupancy vectors for one (N, cap), with an ordinal lookup. The
// enumeration order is the lexicographic order of the counts sequence.
class StateSpace {
  public:
    StateSpace(int n_servers, int cap, std::size_t max_states = 200000);

    int n_servers() const { return n_servers_; }
    int cap() const { return cap_; }
    std::size_t size() const { return states_.size(); }
    const OccupancyVector& state(std::size_t index) const { return states_.at(index); }
    std::size_t index_of(const std::vector<int>& counts) const;

  private:
    int n_servers_;
    int cap_;
    std::vector<OccupancyVector> states_;

    struct CountsHash {
        std::size_t operator()(const std::vector<int>& v) const;
    };
    std::unordered_map<std::vector<int>, std::size_t, CountsHash> index_;
};

struct Transition {
    std::size_t to;
    double rate;
};

// Sparse CTMC generator over a StateSpace; rows hold the off-diagonal
// rates, diagonal() the negated row sums. Consumers re-validate the
// zero-row-sum invariant before solving.
class Generator {
  public:
    Generator(StateSpace space, std::vector<std::vector<Transition>> rows,
              std::vector<double> diagonal);

    const StateSpace& space() const { return space_; }
    std::size_t size() const { return rows_.size(); }
    const std::vector<Transition>& row(std::size_t i) const { return rows_.at(i); }
    double diagonal(std::size_t i) const { return diagonal_.at(i); }

    double max_row_sum_residual() const;
    double max_exit_rate() const;

    // pi * G as a row vector; residual diagnostic for solvers.
    std::vector<double> apply_left(std::span<const double> pi) const;

  private:
    StateSpace space_;
    std::vector<std::vector<Transition>> rows_;
    std::vector<double> diagonal_;
};

// Exact generator of the occupancy chain under one policy: arrivals at
// rate N - beta*sqrt(N) split over landing levels by the uniform-subset
// selection law, departures at unit rate per busy server.
Generator build_generator(const PolicySpec& policy, double beta,
                          std::size_t max_states = 200000);

struct StationaryOptions {
    std::size_t dense_limit = 5000;   // direct solve at or below this size
    double residual_tol = 1e-10;      // required max |(pi G)_j|
    long long max_iterations = 2000000; // uniformized power-iteration cap
};

// Unique probability vector with pi G = 0. Direct dense solve with the
// normalization-row replacement below dense_limit, uniformized power
// iteration above it.
std::vector<double> stationary(const Generator& gen, const StationaryOptions& options = {});

// 0.5 * sum |p_i - q_i|; inputs must be equal-length probability vectors.
double tv_distance(std::span<const double> p, std::span<const double> q);

// Fraction of [0, horizon] that a path spends in each state of the space.
std::vector<double> time_average_distribution(const SystemPath& path, const StateSpace& space,
                                              double horizon);

} // namespace balsim
