#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "balsim/occupancy.hpp"
#include "balsim/rng.hpp"

#include <numeric>

using namespace balsim;

namespace {

OccupancyVector make(int n, std::vector<int> counts, int cap = 0) {
    if (cap == 0) cap = static_cast<int>(counts.size());
    return {n, cap, std::move(counts)};
}

// Reconstruct the sorted queue-length list: Q_i - Q_{i+1} servers hold
// exactly i tasks. Independent route to the stack heights.
std::vector<int> sorted_heights(const OccupancyVector& q) {
    std::vector<int> heights;
    const int n = q.n_servers();
    int stored = static_cast<int>(q.counts().size());
    for (int level = 0; level <= stored; ++level) {
        const int here = level == 0 ? n : q.level_count(level);
        const int above = level == stored ? 0 : q.level_count(level + 1);
        for (int c = 0; c < here - above; ++c) heights.push_back(level);
    }
    return heights;
}

} // namespace

TEST_CASE("index_of_stack matches the worked configurations") {
    const auto fig1 = make(10, {10, 9, 7, 5, 2});
    CHECK(fig1.index_of_stack(7) == 4);
    const auto fig2 = make(10, {10, 9, 7, 4, 2});
    CHECK(fig2.index_of_stack(2) == 2);
    const auto empty = make(5, {0, 0});
    CHECK(empty.index_of_stack(1) == 0);
    CHECK_THROWS_AS((void)fig1.index_of_stack(0), std::out_of_range);
    CHECK_THROWS_AS((void)fig1.index_of_stack(11), std::out_of_range);
}

TEST_CASE("index_of_stack equals the height of the c-th sorted stack") {
    for (int n = 1; n <= 6; ++n) {
        for (int cap = 2; cap <= 4; ++cap) {
            for (const auto& q : enumerate_occupancy_states(n, cap)) {
                const auto heights = sorted_heights(q);
                REQUIRE(heights.size() == static_cast<std::size_t>(n));
                for (int c = 1; c <= n; ++c) {
                    CAPTURE(q.to_string());
                    CHECK(q.index_of_stack(c) == heights[static_cast<std::size_t>(c - 1)]);
                }
            }
        }
    }
}

TEST_CASE("remove_at decrements exactly the indexed level") {
    auto fig1 = make(10, {10, 9, 7, 5, 2});
    fig1.remove_at(7);
    CHECK(fig1.counts() == std::vector<int>{10, 9, 7, 4, 2});

    auto empty = make(5, {0, 0});
    for (int k = 1; k <= 5; ++k) {
        empty.remove_at(k);
        CHECK(empty.counts() == std::vector<int>{0, 0});
    }

    auto small = make(3, {3, 1});
    small.remove_at(3);
    CHECK(small.counts() == std::vector<int>{3, 0});
}

TEST_CASE("add_at lands above the indexed level and drops at the cap") {
    auto fig2 = make(10, {10, 9, 7, 4, 2});
    CHECK_FALSE(fig2.add_at(2));
    CHECK(fig2.counts() == std::vector<int>{10, 9, 8, 4, 2});

    auto full = make(3, {3, 3});
    for (int l = 1; l <= 3; ++l) {
        CHECK(full.add_at(l));
        CHECK(full.counts() == std::vector<int>{3, 3});
    }

    auto idle = make(3, {2, 0});
    CHECK_FALSE(idle.add_at(1));
    CHECK(idle.counts() == std::vector<int>{3, 0});
}

TEST_CASE("min_stack_height counts saturated levels") {
    CHECK(make(10, {10, 9, 7, 5, 2}).min_stack_height() == 1);
    CHECK(make(5, {0, 0}).min_stack_height() == 0);
    CHECK(make(5, {5, 5}).min_stack_height() == 2);
}

TEST_CASE("unbounded vectors grow on demand and never drop") {
    OccupancyVector q(1, kUnboundedCap);
    for (int i = 0; i < 10; ++i) CHECK_FALSE(q.add_at(1));
    CHECK(q.counts() == std::vector<int>(10, 1));
    CHECK(q.total_tasks() == 10);
    q.remove_at(1);
    CHECK(q.level_count(10) == 0);
    CHECK(q.level_count(9) == 1);
}

TEST_CASE("constructor rejects chain violations") {
    CHECK_THROWS_AS(make(3, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(make(3, {4, 0}), std::invalid_argument);
    CHECK_THROWS_AS(make(3, {2, -1}), std::invalid_argument);
}

TEST_CASE("mutations preserve the chain and conserve tasks") {
    Rng rng(substream_seed(7, "occupancy-walk"));
    for (int n = 1; n <= 5; ++n) {
        for (int cap : {2, 3, kUnboundedCap}) {
            OccupancyVector q(n, cap);
            for (int step = 0; step < 400; ++step) {
                const long long before = q.total_tasks();
                if (rng.bernoulli(0.55)) {
                    const bool dropped = q.add_at(rng.uniform_int(1, n));
                    CHECK(q.total_tasks() == before + (dropped ? 0 : 1));
                } else {
                    q.remove_at(rng.uniform_int(1, n));
                    CHECK(before - q.total_tasks() <= 1);
                }
                // Reconstructing revalidates the chain invariant.
                CHECK_NOTHROW(OccupancyVector(n, cap, q.counts()));
            }
        }
    }
}

TEST_CASE("dominates compares with zero padding") {
    CHECK(dominates(make(10, {10, 9, 7, 4, 2}), make(10, {10, 9, 7, 5, 2})));
    const auto a = make(4, {3, 2});
    CHECK(dominates(a, a));
    CHECK_FALSE(dominates(make(4, {3, 2}), make(4, {3, 1})));
    CHECK(dominates(make(4, {3, 0}), make(4, {3, 1, 1})));
    CHECK_FALSE(dominates(make(4, {3, 1, 1}), make(4, {3, 1})));
    CHECK_THROWS_AS((void)dominates(make(3, {1, 0}), make(4, {1, 0})), std::invalid_argument);
}

TEST_CASE("apply_rule on the worked removal and addition cases") {
    const auto a0 = make(3, {3, 0});
    const auto b0 = make(3, {3, 1});
    const auto [a1, b1] = apply_rule(a0, b0, StepKind::removal, {.k = 3});
    CHECK(a1.counts() == std::vector<int>{2, 0});
    CHECK(b1.counts() == std::vector<int>{3, 0});

    const auto empty = make(3, {0, 0});
    const RuleParams params{.k = 1, .l = 2, .l_a = 3, .l_b = 1};
    REQUIRE(params.admissible());
    const auto [a2, b2] = apply_rule(empty, empty, StepKind::addition, params);
    CHECK(a2.counts() == std::vector<int>{1, 0});
    CHECK(b2.counts() == std::vector<int>{1, 0});

    CHECK_THROWS_AS(apply_rule(make(3, {1, 0}), make(4, {1, 0}), StepKind::removal, {.k = 1}),
                    std::invalid_argument);
    // A's capacity may not exceed B's.
    CHECK_THROWS_AS(apply_rule(make(3, {1, 0, 0}), make(3, {1, 0}), StepKind::removal, {.k = 1}),
                    std::invalid_argument);
}

TEST_CASE("admissibility predicate") {
    CHECK(RuleParams{.k = 1, .l = 1, .l_a = 2, .l_b = 2}.admissible());
    CHECK(RuleParams{.k = 1, .l = 1, .l_a = 5, .l_b = 2}.admissible());
    CHECK(RuleParams{.k = 1, .l = 3, .l_a = 4, .l_b = 3}.admissible());
    CHECK_FALSE(RuleParams{.k = 1, .l = 1, .l_a = 1, .l_b = 2}.admissible()); // l_a < l_b
    CHECK_FALSE(RuleParams{.k = 1, .l = 2, .l_a = 4, .l_b = 3}.admissible()); // l between
}

TEST_CASE("admissible steps preserve dominance exhaustively at small sizes") {
    const auto result = exhaustive_rule_dominance(3, 3, 3);
    CHECK(result.cases == 9225);
    CHECK(result.violations == 0);
}

TEST_CASE("admissible fuzz finds nothing, inadmissible search finds violations") {
    const auto clean = fuzz_rule_dominance(6, 4, 20000, 20240901, /*admissible_only=*/true);
    CHECK(clean.trials == 20000);
    CHECK(clean.violations == 0);

    long long found = 0;
    for (int n = 2; n <= 6; ++n) {
        const auto dirty = fuzz_rule_dominance(n, 4, 20000, 20240901, /*admissible_only=*/false);
        found += dirty.violations;
        if (dirty.first_violation) {
            CHECK_FALSE(dirty.first_violation->params.admissible());
        }
    }
    CHECK(found > 0);
}

TEST_CASE("a concrete inadmissible counterexample") {
    // Equal ensembles at minimum height cap-1: A adds onto a short stack
    // while B's target is already full, breaking the ordering.
    const auto a = make(2, {2, 1});
    const auto b = make(2, {2, 1});
    const RuleParams params{.k = 1, .l = 1, .l_a = 1, .l_b = 2};
    REQUIRE_FALSE(params.admissible());
    const auto [a1, b1] = apply_rule(a, b, StepKind::addition, params);
    CHECK(a1.counts() == std::vector<int>{2, 2});
    CHECK(b1.counts() == std::vector<int>{2, 1});
    CHECK_FALSE(dominates(a1, b1));
}

TEST_CASE("state enumeration is complete and duplicate-free") {
    const auto states = enumerate_occupancy_states(4, 3);
    CHECK(states.size() == 35); // C(4+3, 3)
    for (std::size_t i = 1; i < states.size(); ++i) {
        CHECK(states[i - 1].counts() < states[i].counts());
    }
}
