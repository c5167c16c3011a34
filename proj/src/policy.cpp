#include "balsim/policy.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace balsim {

PolicySpec::PolicySpec(int n_servers, int cap, std::vector<int> sizes, std::string name)
    : n_servers_(n_servers), cap_(cap), sizes_(std::move(sizes)), name_(std::move(name)) {
    if (n_servers < 1) throw std::invalid_argument("policy: n_servers must be >= 1");
    if (cap < 2) throw std::invalid_argument("policy: cap must be >= 2");
    if (sizes_.empty()) throw std::invalid_argument("policy: selection sizes must be non-empty");
    if (cap_ != kUnboundedCap) {
        if (static_cast<int>(sizes_.size()) > cap_) {
            throw std::invalid_argument("policy: more selection sizes than buffer levels");
        }
        sizes_.resize(static_cast<std::size_t>(cap_), sizes_.back());
    }
    for (int d : sizes_) {
        if (d < 1 || d > n_servers_) {
            throw std::invalid_argument("policy: selection sizes must lie in 1..N");
        }
    }
}

PolicySpec PolicySpec::jsq(int n_servers, int cap) {
    return {n_servers, cap, {n_servers}, "jsq"};
}

PolicySpec PolicySpec::jiq(int n_servers, int cap) {
    return {n_servers, cap, {n_servers, 1}, "jiq"};
}

PolicySpec PolicySpec::jiq_d(int n_servers, int d, int cap) {
    return {n_servers, cap, {n_servers, d}, "jiq(" + std::to_string(d) + ")"};
}

PolicySpec PolicySpec::jsq_d(int n_servers, int d, int cap) {
    return {n_servers, cap, {d}, "jsq(" + std::to_string(d) + ")"};
}

PolicySpec PolicySpec::custom(int n_servers, std::vector<int> selection_sizes, int cap,
                              std::string name) {
    if (name.empty()) {
        std::ostringstream out;
        out << "pi(";
        for (std::size_t i = 0; i < selection_sizes.size(); ++i) {
            if (i) out << ",";
            out << selection_sizes[i];
        }
        out << ")";
        name = out.str();
    }
    return {n_servers, cap, std::move(selection_sizes), std::move(name)};
}

int PolicySpec::selection_size(int level) const {
    if (level < 0) throw std::out_of_range("selection level must be >= 0");
    if (level >= static_cast<int>(sizes_.size())) {
        if (!is_unbounded()) throw std::out_of_range("selection level beyond the buffer size");
        return sizes_.back();
    }
    return sizes_[static_cast<std::size_t>(level)];
}

namespace {

int parse_size_token(std::string_view token, int n_servers) {
    if (token == "N" || token == "n") return n_servers;
    int value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw ParseError("policy descriptor: bad selection size '" + std::string(token) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

// Trailing ":cap=<b>|inf" suffix; returns kUnboundedCap, a value, or 0 when
// absent.
int take_cap_suffix(std::vector<std::string_view>& parts) {
    if (parts.empty()) return 0;
    const std::string_view last = parts.back();
    if (!last.starts_with("cap=")) return 0;
    const std::string_view value = last.substr(4);
    parts.pop_back();
    if (value == "inf") return kUnboundedCap;
    int cap = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), cap);
    if (ec != std::errc{} || ptr != value.data() + value.size() || cap < 2) {
        throw ParseError("policy descriptor: bad cap '" + std::string(value) + "'");
    }
    return cap;
}

} // namespace

PolicySpec parse_policy(std::string_view descriptor, int n_servers) {
    auto parts = split(descriptor, ':');
    if (parts.empty() || parts[0].empty()) throw ParseError("empty policy descriptor");
    const std::string_view head = parts[0];
    parts.erase(parts.begin());
    const int cap = take_cap_suffix(parts);

    try {
        if (head == "jsq") {
            if (!parts.empty()) throw ParseError("policy descriptor: unexpected trailing parts");
            return PolicySpec::jsq(n_servers, cap ? cap : 2);
        }
        if (head == "jiq") {
            if (parts.empty()) return PolicySpec::jiq(n_servers, cap ? cap : 2);
            if (parts.size() > 1) throw ParseError("policy descriptor: unexpected trailing parts");
            const int d = parse_size_token(parts[0], n_servers);
            return PolicySpec::jiq_d(n_servers, d, cap ? cap : 2);
        }
        if (head == "pi") {
            if (parts.size() != 1 || parts[0].empty()) {
                throw ParseError("policy descriptor: pi: needs a size list");
            }
            std::vector<int> sizes;
            for (std::string_view token : split(parts[0], ',')) {
                sizes.push_back(parse_size_token(token, n_servers));
            }
            const int effective_cap = cap ? cap : static_cast<int>(sizes.size());
            return PolicySpec::custom(n_servers, std::move(sizes), effective_cap,
                                      std::string(descriptor));
        }
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("policy descriptor '") + std::string(descriptor) +
                         "': " + e.what());
    }
    throw ParseError("unknown policy descriptor '" + std::string(descriptor) + "'");
}

PermutationDraw::PermutationDraw(int n_servers, std::uint64_t seed)
    : n_servers_(n_servers), rng_(Rng(seed)) {
    if (n_servers < 1) throw std::invalid_argument("permutation draw: n_servers must be >= 1");
}

PermutationDraw::PermutationDraw(std::vector<int> minima)
    : n_servers_(static_cast<int>(minima.size())), minima_(std::move(minima)) {}

PermutationDraw PermutationDraw::from_permutation(const std::vector<int>& sigma) {
    const int n = static_cast<int>(sigma.size());
    std::vector<int> seen(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> minima(sigma.size());
    int running = n + 1;
    for (int i = 0; i < n; ++i) {
        const int v = sigma[static_cast<std::size_t>(i)];
        if (v < 1 || v > n || seen[static_cast<std::size_t>(v)]++) {
            throw std::invalid_argument("from_permutation: not a permutation of 1..N");
        }
        running = std::min(running, v);
        minima[static_cast<std::size_t>(i)] = running;
    }
    return PermutationDraw(std::move(minima));
}

int PermutationDraw::prefix_min(int m) {
    if (m < 1 || m > n_servers_) throw std::out_of_range("prefix_min: m out of 1..N");
    if (m == n_servers_) return 1; // the full prefix always contains the minimum
    if (minima_.empty()) {
        minima_.push_back(rng_->uniform_int(1, n_servers_));
    }
    while (static_cast<int>(minima_.size()) < m) {
        const int i = static_cast<int>(minima_.size());
        const int current = minima_.back();
        int next = current;
        if (current > 1 && rng_->uniform01() < double(current - 1) / double(n_servers_ - i)) {
            next = rng_->uniform_int(1, current - 1);
        }
        minima_.push_back(next);
    }
    return minima_[static_cast<std::size_t>(m - 1)];
}

std::optional<int> dispatch(const PolicySpec& policy, const OccupancyVector& q,
                            PermutationDraw& draw) {
    if (policy.n_servers() != q.n_servers() || draw.n_servers() != q.n_servers()) {
        throw std::invalid_argument("dispatch: mismatched number of servers");
    }
    if (policy.cap() != q.cap()) {
        throw std::invalid_argument("dispatch: policy and occupancy buffer sizes differ");
    }
    const int k = q.min_stack_height();
    if (!policy.is_unbounded() && k >= policy.cap()) {
        return std::nullopt; // every queue is full, the task is discarded
    }
    return draw.prefix_min(policy.selection_size(k));
}

bool prop2_admissible(const PolicySpec& a, const PolicySpec& b) {
    if (a.n_servers() != b.n_servers()) {
        throw std::invalid_argument("prop2_admissible: mismatched number of servers");
    }
    if (a.is_unbounded()) return false;
    const int cap_a = a.cap();
    if (!(cap_a <= b.cap())) return false;

    // Common selection size d on levels 0..b-2 across both schemes.
    const int d = a.selection_size(0);
    for (int level = 0; level <= cap_a - 2; ++level) {
        if (a.selection_size(level) != d || b.selection_size(level) != d) return false;
    }
    const int last_a = a.selection_size(cap_a - 1);
    const int last_b = b.selection_size(cap_a - 1);
    if (last_a > last_b) return false;
    return d == a.n_servers() || d <= last_b;
}

} // namespace balsim
