#include "balsim/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace balsim {

namespace {

// Number of non-increasing sequences of length cap over 0..N is
// C(N + cap, cap); computed in floating point only to police the budget.
double state_count_estimate(int n_servers, int cap) {
    double count = 1.0;
    for (int j = 1; j <= cap; ++j) {
        count *= static_cast<double>(n_servers + j) / j;
        if (count > 1e18) return count;
    }
    return count;
}

} // namespace

std::size_t StateSpace::CountsHash::operator()(const std::vector<int>& v) const {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int x : v) {
        h ^= static_cast<std::size_t>(x) + 0x9e3779b9ULL + (h << 6) + (h >> 2);
    }
    return h;
}

StateSpace::StateSpace(int n_servers, int cap, std::size_t max_states)
    : n_servers_(n_servers), cap_(cap) {
    if (cap == kUnboundedCap) {
        throw std::invalid_argument("state space requires a finite buffer size");
    }
    if (state_count_estimate(n_servers, cap) > static_cast<double>(max_states)) {
        throw CapacityError("state space exceeds the configured budget of " +
                            std::to_string(max_states) + " states");
    }
    states_ = enumerate_occupancy_states(n_servers, cap);
    index_.reserve(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) {
        index_.emplace(states_[i].counts(), i);
    }
}

std::size_t StateSpace::index_of(const std::vector<int>& counts) const {
    const auto it = index_.find(counts);
    if (it == index_.end()) {
        throw std::out_of_range("occupancy state not in this state space");
    }
    return it->second;
}

Generator::Generator(StateSpace space, std::vector<std::vector<Transition>> rows,
                     std::vector<double> diagonal)
    : space_(std::move(space)), rows_(std::move(rows)), diagonal_(std::move(diagonal)) {
    if (rows_.size() != space_.size() || diagonal_.size() != space_.size()) {
        throw std::invalid_argument("generator shape does not match its state space");
    }
}

double Generator::max_row_sum_residual() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        double sum = diagonal_[i];
        for (const auto& t : rows_[i]) sum += t.rate;
        worst = std::max(worst, std::abs(sum));
    }
    return worst;
}

double Generator::max_exit_rate() const {
    double worst = 0.0;
    for (double d : diagonal_) worst = std::max(worst, -d);
    return worst;
}

std::vector<double> Generator::apply_left(std::span<const double> pi) const {
    std::vector<double> out(rows_.size(), 0.0);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        out[i] += pi[i] * diagonal_[i];
        for (const auto& t : rows_[i]) out[t.to] += pi[i] * t.rate;
    }
    return out;
}

namespace {

// P(all m uniformly sampled servers are among the q busiest) =
// C(q, m) / C(n, m), evaluated as a product of ratios.
double subset_ratio(int q, int m, int n) {
    if (q < m) return 0.0;
    double p = 1.0;
    for (int j = 0; j < m; ++j) {
        p *= static_cast<double>(q - j) / static_cast<double>(n - j);
    }
    return p;
}

} // namespace

Generator build_generator(const PolicySpec& policy, double beta, std::size_t max_states) {
    if (policy.is_unbounded()) {
        throw std::invalid_argument("build_generator: needs a finite buffer size");
    }
    const int n = policy.n_servers();
    const int cap = policy.cap();
    const double lambda = n - beta * std::sqrt(static_cast<double>(n));
    if (lambda <= 0.0) {
        throw std::invalid_argument("build_generator: arrival rate N - beta*sqrt(N) must be positive");
    }

    StateSpace space(n, cap, max_states);
    std::vector<std::vector<Transition>> rows(space.size());
    std::vector<double> diagonal(space.size(), 0.0);

    std::vector<int> scratch;
    for (std::size_t idx = 0; idx < space.size(); ++idx) {
        const OccupancyVector& q = space.state(idx);
        auto& row = rows[idx];

        const int k = q.min_stack_height();
        if (k < cap) {
            const int m = policy.selection_size(k);
            // Landing level i in k..cap-1 moves Q_{i+1} up by one; level cap
            // is an overflow and leaves the occupancy unchanged.
            for (int level = k; level < cap; ++level) {
                const int q_here = level == 0 ? n : q.level_count(level);
                const int q_above = q.level_count(level + 1);
                const double prob = subset_ratio(q_here, m, n) - subset_ratio(q_above, m, n);
                if (prob <= 0.0) continue;
                scratch = q.counts();
                ++scratch[static_cast<std::size_t>(level)];
                row.push_back({space.index_of(scratch), lambda * prob});
            }
        }

        for (int level = 1; level <= cap; ++level) {
            const int busy_here = q.level_count(level) - (level < cap ? q.level_count(level + 1) : 0);
            if (busy_here <= 0) continue;
            scratch = q.counts();
            --scratch[static_cast<std::size_t>(level - 1)];
            row.push_back({space.index_of(scratch), static_cast<double>(busy_here)});
        }

        double out_rate = 0.0;
        for (const auto& t : row) out_rate += t.rate;
        diagonal[idx] = -out_rate;
    }
    return {std::move(space), std::move(rows), std::move(diagonal)};
}

namespace {

std::vector<double> stationary_dense(const Generator& gen, double residual_tol) {
    const auto size = static_cast<Eigen::Index>(gen.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
    for (std::size_t i = 0; i < gen.size(); ++i) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = gen.diagonal(i);
        for (const auto& t : gen.row(i)) {
            m(static_cast<Eigen::Index>(t.to), static_cast<Eigen::Index>(i)) += t.rate;
        }
    }
    m.row(size - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
    rhs(size - 1) = 1.0;
    const Eigen::VectorXd pi = m.partialPivLu().solve(rhs);

    std::vector<double> result(gen.size());
    for (std::size_t i = 0; i < gen.size(); ++i) {
        const double v = pi(static_cast<Eigen::Index>(i));
        if (v < -1e-9) {
            throw NumericalError("stationary solve produced a negative probability", std::abs(v));
        }
        result[i] = std::max(v, 0.0);
    }
    const double total = std::accumulate(result.begin(), result.end(), 0.0);
    for (double& v : result) v /= total;

    const auto residual_vec = gen.apply_left(result);
    double residual = 0.0;
    for (double r : residual_vec) residual = std::max(residual, std::abs(r));
    if (residual > residual_tol) {
        throw NumericalError("stationary solve residual above tolerance", residual);
    }
    return result;
}

std::vector<double> stationary_iterative(const Generator& gen, const StationaryOptions& options) {
    const double uniformization_rate = 1.01 * gen.max_exit_rate() + 1e-12;
    std::vector<double> pi(gen.size(), 1.0 / static_cast<double>(gen.size()));
    std::vector<double> next(gen.size(), 0.0);

    double residual = std::numeric_limits<double>::infinity();
    for (long long iter = 0; iter < options.max_iterations; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < gen.size(); ++i) {
            next[i] += pi[i] * (1.0 + gen.diagonal(i) / uniformization_rate);
            for (const auto& t : gen.row(i)) {
                next[t.to] += pi[i] * t.rate / uniformization_rate;
            }
        }
        pi.swap(next);
        if (iter % 50 == 49) {
            const auto residual_vec = gen.apply_left(pi);
            residual = 0.0;
            for (double r : residual_vec) residual = std::max(residual, std::abs(r));
            if (residual <= options.residual_tol) return pi;
        }
    }
    throw NumericalError("power iteration did not reach the residual tolerance", residual);
}

} // namespace

std::vector<double> stationary(const Generator& gen, const StationaryOptions& options) {
    if (gen.size() == 0) throw std::invalid_argument("stationary: empty generator");
    const double scale = std::max(gen.max_exit_rate(), 1.0);
    if (gen.max_row_sum_residual() > 1e-12 * scale) {
        throw std::invalid_argument("stationary: generator rows do not sum to zero");
    }
    if (gen.size() <= options.dense_limit) {
        return stationary_dense(gen, options.residual_tol);
    }
    return stationary_iterative(gen, options);
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("tv_distance: length mismatch");
    }
    const double sum_p = std::accumulate(p.begin(), p.end(), 0.0);
    const double sum_q = std::accumulate(q.begin(), q.end(), 0.0);
    if (std::abs(sum_p - 1.0) > 1e-9 || std::abs(sum_q - 1.0) > 1e-9) {
        throw std::invalid_argument("tv_distance: inputs must sum to one");
    }
    double tv = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
    return 0.5 * tv;
}

std::vector<double> time_average_distribution(const SystemPath& path, const StateSpace& space,
                                              double horizon) {
    if (path.n_servers != space.n_servers()) {
        throw std::invalid_argument("time_average_distribution: server count mismatch");
    }
    if (path.points.empty() || horizon <= path.points.front().time) {
        throw std::invalid_argument("time_average_distribution: empty window");
    }
    if (path.points.back().time > horizon) {
        throw std::invalid_argument("time_average_distribution: path extends past the horizon");
    }
    std::vector<double> weight(space.size(), 0.0);
    for (std::size_t j = 0; j < path.points.size(); ++j) {
        const double t0 = path.points[j].time;
        const double t1 = j + 1 < path.points.size() ? path.points[j + 1].time : horizon;
        weight[space.index_of(path.points[j].q)] += t1 - t0;
    }
    const double span = horizon - path.points.front().time;
    for (double& w : weight) w /= span;
    return weight;
}

} // namespace balsim
