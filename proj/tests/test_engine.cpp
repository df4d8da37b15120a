#include <doctest.h>

#include <vector>

#include "clockauct/engine.hpp"
#include "clockauct/feasibility.hpp"
#include "clockauct/json_io.hpp"

using namespace clockauct;

namespace {
FeasibilitySystem singletons(int n) {
    std::vector<BidderSet> sets;
    for (int i = 0; i < n; ++i) sets.push_back({i});
    return FeasibilitySystem::from_maximal_sets(n, sets);
}
} // namespace

TEST_CASE("bidders drop exactly when the price exceeds the value") {
    auto sys = FeasibilitySystem::from_maximal_sets(2, {{0, 1}});
    AuctionState st(sys, {5.0, 3.0});
    auto resp = st.offer_round({{0, 4.0}, {1, 4.0}});
    CHECK(resp == std::vector<char>{1, 0});
    CHECK(st.active_set() == BidderSet{0});
}

TEST_CASE("acceptance at equality") {
    auto sys = FeasibilitySystem::from_maximal_sets(1, {{0}});
    AuctionState st(sys, {3.0});
    auto resp = st.offer_round({{0, 3.0}});
    CHECK(resp == std::vector<char>{1});
}

TEST_CASE("clock monotonicity is enforced") {
    auto sys = FeasibilitySystem::from_maximal_sets(1, {{0}});
    AuctionState st(sys, {10.0});
    st.offer_round({{0, 2.0}});
    CHECK_THROWS_AS(st.offer_round({{0, 1.0}}), ContractViolation);
}

TEST_CASE("finalize sets payments from the last accepted price") {
    auto sys = FeasibilitySystem::from_maximal_sets(2, {{0}, {1}});

    SUBCASE("serving nobody costs nobody anything") {
        AuctionState st(sys, {5.0, 1.0});
        Transcript t = st.finalize({});
        CHECK(t.served.empty());
        CHECK(t.revenue() == 0.0);
        CHECK(t.welfare({5.0, 1.0}) == 0.0);
    }

    SUBCASE("single round at price 2") {
        AuctionState st(sys, {5.0, 1.0});
        st.offer_uniform(2.0);
        Transcript t = st.finalize({0});
        CHECK(t.payments[0] == 2.0);
        CHECK(t.payments[1] == 0.0);
        CHECK(t.revenue() == 2.0);
    }

    SUBCASE("serving a dropped bidder is a contract violation") {
        AuctionState st(sys, {5.0, 1.0});
        st.offer_uniform(2.0); // bidder 1 drops
        CHECK_THROWS_AS(st.finalize({1}), ContractViolation);
    }

    SUBCASE("serving an infeasible set is a contract violation") {
        AuctionState st(sys, {5.0, 5.0});
        st.offer_uniform(2.0);
        CHECK_THROWS_AS(st.finalize({0, 1}), ContractViolation);
    }
}

TEST_CASE("welfare and revenue") {
    auto sys = FeasibilitySystem::from_maximal_sets(2, {{0, 1}});
    AuctionState st(sys, {1.0, 2.0});
    st.offer_uniform(1.0);
    Transcript t = st.finalize({0, 1});
    CHECK(t.welfare({1.0, 2.0}) == doctest::Approx(3.0));
    CHECK(t.revenue() == doctest::Approx(2.0));
    CHECK(t.revenue() <= t.welfare({1.0, 2.0})); // individual rationality
}

TEST_CASE("transcripts replay cleanly and violations are caught") {
    auto sys = singletons(3);
    const Valuation v = {2.0, 0.5, 1.5};
    AuctionState st(sys, v);
    st.offer_uniform(1.0); // bidder 1 drops
    st.offer_round({{0, 1.5}, {2, 1.5}});
    Transcript t = st.finalize({0});
    CHECK(check_transcript(t, sys, v).empty());

    SUBCASE("payment tampering is detected") {
        Transcript bad = t;
        bad.payments[0] = 0.25;
        CHECK_FALSE(check_transcript(bad, sys, v).empty());
    }
    SUBCASE("forged response is detected") {
        Transcript bad = t;
        bad.rounds[0].accepted[1] = 1; // bidder 1 "accepted" 1.0 > 0.5
        CHECK_FALSE(check_transcript(bad, sys, v).empty());
    }
    SUBCASE("infeasible served set is detected") {
        Transcript bad = t;
        bad.served = {0, 2};
        bad.payments[2] = 1.5;
        CHECK_FALSE(check_transcript(bad, sys, v).empty());
    }
}

TEST_CASE("identical runs produce byte-identical transcripts") {
    auto sys = singletons(3);
    const Valuation v = {2.0, 0.5, 1.5};
    auto run = [&] {
        AuctionState st(sys, v);
        st.offer_uniform(0.25);
        st.offer_uniform(0.75);
        Transcript t = st.finalize({0});
        t.annotate("mechanism", "test");
        return transcript_to_json(t).dump();
    };
    CHECK(run() == run());
}
