#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace flowgame;

namespace {

NodeId N(const char* s) { return NodeId::parse(s); }
Rat R(const char* s) { return parse_rat(s); }

MarkedBranch B(std::initializer_list<std::size_t> ones) { return MarkedBranch{ones}; }

GameConfig tall(const StrategyCert& c) {
    return {static_cast<std::size_t>(c.monotone_height.get_ui()), 1, 1, c.target()};
}

}  // namespace

TEST_CASE("dominance and watermark", "[monotone]") {
    CHECK(dominates(B({}), B({3})));
    CHECK(dominates(B({}), B({})));
    CHECK(dominates(B({2}), B({2, 5})));
    CHECK_FALSE(dominates(B({2}), B({5})));
    CHECK(dominates(N("0100"), N("011")));
    CHECK_FALSE(dominates(N("1"), N("0111")));
    CHECK(watermark(B({})) == -1);
    CHECK(watermark(B({0, 7})) == 7);
    CHECK(B({0, 3}).str() == "1001");
}

TEST_CASE("mark records", "[monotone]") {
    MarkRecord r;
    CHECK_FALSE(r.current());
    CHECK(r.mark(N("00")));
    CHECK_FALSE(r.mark(N("00")));
    CHECK(r.mark(N("01")));
    CHECK(r.changes() == 1);
    CHECK(r.is_chain());
    r.mark(N("10"));
    CHECK(r.first_break() == 2);
}

TEST_CASE("subgame root placement", "[monotone]") {
    CHECK(place_subgame_root(RootKind::Left, B({})) == N("00"));
    NodeId left = place_subgame_root(RootKind::Left, B({1, 4}));
    CHECK(left == N("011110"));
    CHECK(left.depth() == 6);
    for (auto old : {B({1}), B({2, 3}), B({1, 2, 3, 4})}) {
        MarkedBranch nb = old;
        nb.add(left);
        CHECK(dominates(old, nb));
        CHECK(dominates(old, B({1, 2, 3, 4})));
    }
    CHECK(place_subgame_root(RootKind::Threat, B({0, 4})) == N("111111"));
    CHECK(place_subgame_root(RootKind::Threat, B({})) == N("1"));

    // successive left roots differ even without new ones
    CHECK(place_subgame_root(RootKind::Left, B({}), {0, 0, {}}) == N("010"));
    // watermark measured from the enclosing root
    CHECK(place_subgame_root(RootKind::Left, B({3, 6}), {3, -1, {}}) == N("01110"));

    Placement p;
    p.marked = N("0101");
    CHECK(place_subgame_root(RootKind::LayerRestart, B({1, 3, 7}), p) == N("01011111"));
    CHECK(place_subgame_root(RootKind::LayerRestart, B({1}), p) == N("01011"));
}

TEST_CASE("placed roots dominate the branch", "[monotone][property]") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 500; ++t) {
        MarkedBranch b;
        for (int c = std::uniform_int_distribution<int>(0, 6)(rng); c > 0; --c)
            b.ones.insert(std::uniform_int_distribution<std::size_t>(1, 30)(rng));
        NodeId th = place_subgame_root(RootKind::Threat, b);
        NodeId left = place_subgame_root(RootKind::Left, b);
        for (std::size_t p : b.ones) {
            REQUIRE(p < th.depth());
            REQUIRE(th.bit(p));
            REQUIRE(p + 1 < left.depth());
            REQUIRE(left.bit(p));
        }
        REQUIRE_FALSE(left.bit(0));
        NodeId mark = oracle::random_node(rng, 20);
        Placement p;
        p.marked = mark;
        NodeId lr = place_subgame_root(RootKind::LayerRestart, b, p);
        REQUIRE(mark.is_prefix_of(lr));
        REQUIRE(lr.depth() > mark.depth());
        REQUIRE(static_cast<long long>(lr.depth()) > watermark(b));
    }
}

TEST_CASE("monotone strategy marks", "[monotone]") {
    auto l = ladder(R("9/8"));
    for (std::size_t rung : {1u, 2u}) {
        const CertPtr cert = l[rung];
        const GameConfig c = tall(*cert);

        auto m = monotone_recursive_strategy(cert);
        auto s = silent();
        MatchTrace t = run_match(*m, *s, c);
        CHECK(t.verdict.kind == VerdictKind::MWins);
        CHECK(m->record().changes() == 0);
        CHECK(m->record().history.size() == 1);

        std::vector<StrategyPtr> suite;
        suite.push_back(threshold_dodger(cert, R("1/1000")));
        suite.push_back(greedy_all());
        suite.push_back(proportional_online());
        suite.push_back(uniform_once());
        for (std::uint64_t seed = 1; seed <= 4; ++seed) suite.push_back(random_adversary(seed, 8));
        for (auto& a : suite) {
            INFO("rung " << rung + 1 << " vs " << a->id());
            auto mm = monotone_recursive_strategy(cert);
            MatchTrace tt = run_match(*mm, *a, c);
            CHECK(tt.verdict.kind == VerdictKind::MWins);
            CHECK(tt.verdict.sum >= ExtRat(cert->target()));
            CHECK(verify_trace(trace_to_jsonl(tt)).ok);
            const MarkRecord& rec = mm->record();
            CHECK(rec.is_chain());
            if (rung == 1) CHECK(rec.changes() <= static_cast<std::size_t>(cert->n + 1));
            for (const auto& x : rec.history) CHECK(x.depth() <= c.height);
            CHECK(watermark(mm->branch()) < static_cast<long long>(c.height));
            // every marked vertex's ones are published
            for (const auto& x : rec.history)
                for (std::size_t p : x.ones()) CHECK(mm->branch().ones.count(p) == 1);
        }
    }
}

TEST_CASE("c.e. builder against a silent adversary", "[monotone][ce]") {
    auto a = silent();
    MatchCaps caps;
    caps.rounds = 50;
    CeResult r = ce_builder({1, 2}, *a, caps);
    CHECK(r.report.verdict.kind == VerdictKind::MWins);
    CHECK(r.report.monotone);
    REQUIRE(r.report.layer_sums.size() == 2);
    for (const auto& s : r.report.layer_sums) CHECK(s.is_infinite());
    CHECK(r.report.total.is_infinite());
    for (const auto& e : r.events) CHECK(r.report.branch.ones.count(e.position) == 1);
    // the only ones are those on the spine of the second layer's root
    REQUIRE(r.report.mark);
    CHECK(verify_enumeration(r.events, r.trace, r.report.branch.str()).ok);
    CHECK(verify_trace(trace_to_jsonl(r.trace)).ok);
}

TEST_CASE("enumeration checks catch tampering", "[monotone][ce]") {
    auto a = proportional_online();
    MatchCaps caps;
    caps.rounds = 400;
    CeResult r = ce_builder({1}, *a, caps);
    CHECK(r.report.monotone);
    const std::string fb = r.report.branch.str();
    REQUIRE(verify_enumeration(r.events, r.trace, fb).ok);
    auto back = enumeration_from_jsonl(enumeration_to_jsonl(r.events));
    REQUIRE(back.size() == r.events.size());
    CHECK(verify_enumeration(back, r.trace, fb).ok);

    if (!r.events.empty()) {
        auto dup = r.events;
        dup.push_back(dup.front());
        dup.back().round = r.trace.rounds + 1;
        CHECK_FALSE(verify_enumeration(dup, r.trace, fb).ok);

        auto dropped = r.events;
        dropped.erase(dropped.begin());
        CHECK_FALSE(verify_enumeration(dropped, r.trace, fb).ok);
    }
    if (r.events.size() >= 2 && r.events.front().round != r.events.back().round) {
        auto swapped = r.events;
        std::swap(swapped.front(), swapped.back());
        CHECK_FALSE(verify_enumeration(swapped, r.trace, fb).ok);
    }
    CHECK_FALSE(verify_enumeration(r.events, r.trace, fb + "1").ok);
}
