#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace flowgame;

namespace {

NodeId N(const char* s) { return NodeId::parse(s); }
Rat R(const char* s) { return parse_rat(s); }

MatchTrace play(Strategy& m, Strategy& a, const GameConfig& c, std::size_t rounds = 2000) {
    MatchOptions opt;
    opt.caps.rounds = rounds;
    MatchTrace t = run_match(m, a, c, opt);
    const auto rep = verify_trace(trace_to_jsonl(t));
    INFO(rep.message);
    CHECK(rep.ok);
    return t;
}

GameConfig for_cert(const StrategyCert& c) { return {c.height, 1, 1, c.target()}; }

void require_no_illegal_a(const MatchTrace& t) {
    for (const auto& e : t.events)
        if (e.delta.player == Player::A) REQUIRE_FALSE(e.error);
}

}  // namespace

TEST_CASE("trivial strategy wins the unit game", "[strategies]") {
    auto m = trivial_strategy();
    auto a = silent();
    MatchTrace t = play(*m, *a, {0, 1, 1, 1});
    CHECK(t.verdict.kind == VerdictKind::MWins);
    CHECK(t.verdict.sum == ExtRat(Rat(1)));
    CHECK(t.m_moves == 1);
}

TEST_CASE("toy strategy examples", "[strategies]") {
    // A covers 00, then answers the 01 commit with a(0)=1, a(01)=1/2
    auto m = toy_strategy(R("9/8"));
    auto a = scripted({{Player::A, {{N("0"), R("1/2")}, {N("00"), R("1/2")}}},
                       {Player::A, {{N("0"), 1}, {N("01"), R("1/2")}}}});
    MatchTrace t = play(*m, *a, {2, 1, 1, R("9/8")});
    CHECK(t.verdict.kind == VerdictKind::MWins);
    CHECK(t.verdict.leaf == N("01"));
    CHECK(t.verdict.sum >= ExtRat(R("5/4")));

    // a(0)=3/4 leaves at most 1/4 for vertex 1
    auto m2 = toy_strategy(R("9/8"));
    auto a2 = scripted({{Player::A, {{N("0"), R("3/4")}, {N("00"), R("3/4")}}},
                        {Player::A, {{N("1"), R("1/4")}, {N("10"), R("1/4")}}}});
    MatchTrace t2 = play(*m2, *a2, {2, 1, 1, R("9/8")});
    CHECK(t2.verdict.kind == VerdictKind::MWins);
    CHECK(t2.verdict.sum >= ExtRat(Rat(2)));
    CHECK(t2.verdict.leaf.str().front() == '1');
}

TEST_CASE("scaled strategies", "[strategies]") {
    // identity wrapper leaves the transcript unchanged
    auto cert = ladder(R("17/16")).back();
    auto plain = recursive_strategy(cert);
    auto wrapped = scaled(recursive_strategy(cert), NodeId::root(), 1, 1);
    auto a1 = proportional_online();
    auto a2 = proportional_online();
    MatchTrace t1 = play(*plain, *a1, for_cert(*cert));
    MatchTrace t2 = play(*wrapped, *a2, for_cert(*cert));
    REQUIRE(t1.events.size() == t2.events.size());
    for (std::size_t i = 0; i < t1.events.size(); ++i) {
        REQUIRE(t1.events[i].delta == t2.events[i].delta);
        REQUIRE(t1.events[i].claim == t2.events[i].claim);
    }

    // trivial scaled by (1/4, 1/2): sum at least 1/2 while a(root) <= 1/2
    auto m = scaled(trivial_strategy(), N("0"), R("1/4"), R("1/2"));
    auto a = scripted({{Player::A, {{N("0"), R("1/2")}}}});
    MatchTrace t = play(*m, *a, {1, 1, 1, R("1/2")});
    CHECK(t.verdict.kind == VerdictKind::MWins);
    CHECK(t.verdict.leaf == N("0"));
    CHECK(t.verdict.sum == ExtRat(R("1/2")));
}

TEST_CASE("recursive strategy against the suite", "[strategies]") {
    auto ladder3 = ladder(R("9/8"));
    for (std::size_t rung : {1u, 2u}) {
        const CertPtr cert = ladder3[rung];
        std::vector<std::pair<std::string, StrategyPtr>> suite;
        suite.emplace_back("greedy", greedy_all());
        suite.emplace_back("prop", proportional_online());
        suite.emplace_back("dodger", threshold_dodger(cert, R("1/1000")));
        suite.emplace_back("uniform", uniform_once());
        suite.emplace_back("silent", silent());
        for (std::uint64_t seed = 1; seed <= 5; ++seed) suite.emplace_back("random", random_adversary(seed, 8));
        for (auto& [name, a] : suite) {
            INFO("rung " << rung + 1 << " vs " << name);
            auto m = recursive_strategy(cert);
            MatchTrace t = play(*m, *a, for_cert(*cert));
            CHECK(t.verdict.kind == VerdictKind::MWins);
            CHECK(t.verdict.sum >= ExtRat(cert->target()));
            CHECK(t.m_moves <= cert->steps);
            require_no_illegal_a(t);
        }
    }
}

TEST_CASE("trigger accounting", "[strategies]") {
    const CertPtr cert = ladder(R("17/16")).back();

    // greedy pours everything into vertex 0 at once: threat during subgame 1
    auto m = recursive_strategy(cert);
    auto g = greedy_all();
    MatchTrace t = play(*m, *g, for_cert(*cert));
    auto& rs = dynamic_cast<RecursiveStrategy&>(*m);
    CHECK(rs.in_threat());
    CHECK(rs.subgame() == 1);
    CHECK(t.verdict.kind == VerdictKind::MWins);
    CHECK(t.verdict.leaf.str().front() == '1');

    // the dodger never reaches the live threshold
    auto m2 = recursive_strategy(cert);
    auto d = threshold_dodger(cert, R("1/100"));
    MatchTrace t2 = play(*m2, *d, for_cert(*cert));
    auto& rs2 = dynamic_cast<RecursiveStrategy&>(*m2);
    CHECK_FALSE(rs2.in_threat());
    CHECK(rs2.subgame() >= 1);
    GameState s(for_cert(*cert));
    long i = 0;
    for (const auto& e : t2.events) {
        s.apply(e.delta);
        if (e.delta.player == Player::M) continue;
        // subgame index as M will see it, from the quotas reached so far
        i = 1;
        while (i < cert->n && s.a(ThresholdDodger::z(i)) >= cert->aq[static_cast<std::size_t>(i - 1)]) ++i;
        if (i < cert->n) REQUIRE(s.a(N("0")) < cert->d[static_cast<std::size_t>(i - 1)]);
    }
    CHECK(t2.verdict.kind == VerdictKind::MWins);
}

TEST_CASE("one-shot play loses to the proportional adversary", "[strategies]") {
    for (std::size_t depth : {0u, 1u, 2u, 3u}) {
        auto m = OneShotStrategy::spread(depth);
        auto a = proportional_online();
        MatchTrace t = play(*m, *a, {3, 1, 1, R("9/8")}, 20);
        CHECK(t.verdict.kind != VerdictKind::MWins);
        // every leaf sum is back below the target after A's reply
        GameState s({3, 1, 1, R("9/8")});
        for (std::size_t i = 0; i < 2 && i < t.events.size(); ++i) s.apply(t.events[i].delta);
        CHECK(best_leaf(s).sum <= ExtRat(Rat(1 + pow2(-30))));
    }
}

TEST_CASE("uniform_once against trivial", "[strategies]") {
    auto m = trivial_strategy();
    auto a = uniform_once();
    MatchTrace t = play(*m, *a, {1, 1, 1, 1});
    CHECK(t.verdict.kind == VerdictKind::MWins);
    CHECK(t.verdict.sum == ExtRat(Rat(1)));
}

TEST_CASE("adversaries only make legal moves", "[strategies][property]") {
    const CertPtr cert = ladder(R("17/16")).back();
    std::mt19937_64 rng(12);
    for (int t = 0; t < 40; ++t) {
        std::vector<StrategyPtr> as;
        as.push_back(greedy_all());
        as.push_back(proportional_online());
        as.push_back(uniform_once());
        as.push_back(random_adversary(rng(), 4 + t % 5));
        as.push_back(threshold_dodger(cert, R("1/1000")));
        for (auto& a : as) {
            // M plays random legal weights
            GameConfig c = oracle::random_config(rng, 8);
            GameState s(c);
            for (int r = 0; r < 6; ++r) {
                auto dm = oracle::random_delta(rng, s, Player::M);
                s.try_apply(dm);
                GameView v = GameView::top(s);
                a->on_event(v, StrategyEvent::opponent_moved(dm));
                Reply rep = a->on_event(v, StrategyEvent::your_turn());
                INFO(a->id());
                REQUIRE_FALSE(s.try_apply({Player::A, rep.updates}));
            }
        }
    }
}

TEST_CASE("layered driver", "[strategies][layered]") {
    GameConfig c;
    c.height = kUnboundedHeight;
    c.target = 2;

    auto m = layered_driver({1, 2});
    auto a = silent();
    MatchTrace t = play(*m, *a, c, 50);
    CHECK(t.verdict.kind == VerdictKind::MWins);
    CHECK(t.verdict.sum.is_infinite());

    auto m2 = layered_driver({1, 2});
    auto a2 = proportional_online();
    MatchOptions opt;
    opt.caps.rounds = 10000;
    MatchResult r = run_match_full(*m2, *a2, c, opt);
    CHECK(r.trace.verdict.kind == VerdictKind::MWins);
    auto& ld = dynamic_cast<LayeredDriver&>(*m2);
    CHECK(ld.active() == 2);
    auto sums = ld.layer_sums(r.state);
    REQUIRE(sums.size() == 2);
    for (const auto& s : sums) CHECK(s >= ExtRat(Rat(1)));
    CHECK(ld.partial_sum(r.state) >= ExtRat(Rat(2)));
    CHECK(verify_trace(trace_to_jsonl(r.trace)).ok);
}
