#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace flowgame;

namespace {

NodeId N(const char* s) { return NodeId::parse(s); }
Rat R(const char* s) { return parse_rat(s); }

class Overspender : public MStrategy {
public:
    std::string id() const override { return "overspender"; }

protected:
    std::vector<Update> play(const GameView& view) override { return {view.set_m(NodeId::root(), 2)}; }
};

class Thrower : public MStrategy {
public:
    std::string id() const override { return "thrower"; }

protected:
    std::vector<Update> play(const GameView&) override { throw std::runtime_error("boom"); }
};

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::string join(const std::vector<std::string>& ls) {
    std::string s;
    for (const auto& l : ls) s += l + "\n";
    return s;
}

MatchTrace dodger_match(std::size_t rounds = 1000) {
    const CertPtr cert = ladder(R("17/16")).back();
    auto m = recursive_strategy(cert);
    auto a = threshold_dodger(cert, R("1/100"));
    MatchOptions opt;
    opt.caps.rounds = rounds;
    return run_match(*m, *a, {cert->height, 1, 1, cert->target()}, opt);
}

}  // namespace

TEST_CASE("unit game ends within the grace period", "[match]") {
    auto m = trivial_strategy();
    auto a = uniform_once();
    MatchOptions opt;
    opt.caps.grace = 2;
    MatchTrace t = run_match(*m, *a, {0, 1, 1, 1}, opt);
    CHECK(t.verdict.kind == VerdictKind::MWins);
    CHECK(t.rounds <= 2);
    CHECK(t.verdict.leaf == NodeId::root());
}

TEST_CASE("first recursive rung beats the dodger", "[match]") {
    MatchTrace t = dodger_match();
    CHECK(t.verdict.kind == VerdictKind::MWins);
    CHECK(t.verdict.sum >= ExtRat(R("17/16")));
    CHECK(t.m_moves <= 18);
}

TEST_CASE("traces round trip and verify", "[match][trace]") {
    MatchTrace t = dodger_match();
    const std::string text = trace_to_jsonl(t);
    MatchTrace back = trace_from_jsonl(text);
    CHECK(trace_to_jsonl(back) == text);
    auto rep = verify_trace(text);
    INFO(rep.message);
    CHECK(rep.ok);
    CHECK(rep.events == t.events.size());
}

TEST_CASE("verification pinpoints corrupted events", "[match][trace]") {
    MatchTrace t = dodger_match();
    auto ls = lines(trace_to_jsonl(t));

    // a changed rational in an M move
    for (std::size_t i = 0; i < t.events.size(); ++i) {
        if (t.events[i].delta.player != Player::M || t.events[i].delta.updates.empty()) continue;
        auto j = nlohmann::json::parse(ls[i + 1]);
        Rat v = parse_rat(j["updates"][0]["value"].get<std::string>());
        j["updates"][0]["value"] = format_rat(Rat(v / 2));
        auto bad = ls;
        bad[i + 1] = j.dump();
        auto rep = verify_trace(join(bad));
        CHECK_FALSE(rep.ok);
        CHECK(rep.divergence == i);
        break;
    }

    // an A move that would break the flow at the root
    for (std::size_t i = 0; i < t.events.size(); ++i) {
        if (t.events[i].delta.player != Player::A) continue;
        auto j = nlohmann::json::parse(ls[i + 1]);
        j["updates"] = nlohmann::json::array({{{"node", "0"}, {"value", "1/1"}}, {{"node", "1"}, {"value", "1/1"}}});
        auto bad = ls;
        bad[i + 1] = j.dump();
        auto rep = verify_trace(join(bad));
        CHECK_FALSE(rep.ok);
        CHECK(rep.divergence == i);
        INFO(rep.message);
        CHECK(rep.message.find("FlowViolation") != std::string::npos);
        GameState s({t.header["config"]["height"].get<std::size_t>(), 1, 1, R("17/16")});
        for (std::size_t k = 0; k < i; ++k) s.apply(t.events[k].delta);
        auto err = s.check({Player::A, {{N("0"), 1}, {N("1"), 1}}});
        REQUIRE(err);
        CHECK(err->kind == MoveErrorKind::FlowViolation);
        break;
    }

    // a truncated trace
    auto cut = ls;
    cut.pop_back();
    CHECK_FALSE(verify_trace(join(cut)).ok);
    cut = ls;
    cut.erase(cut.end() - 3, cut.end() - 1);
    CHECK_FALSE(verify_trace(join(cut)).ok);

    // a changed verdict
    auto j = nlohmann::json::parse(ls.back());
    j["verdict"] = "AWins";
    auto bad = ls;
    bad.back() = j.dump();
    auto rep = verify_trace(join(bad));
    CHECK_FALSE(rep.ok);
    CHECK(rep.divergence == t.events.size());

    // formatting differences are rejected too
    auto spaced = ls;
    spaced[1] = nlohmann::json::parse(spaced[1]).dump(1);
    CHECK_FALSE(verify_trace(join(spaced)).ok);
    CHECK_FALSE(verify_trace("").ok);
    CHECK_FALSE(verify_trace("{\"type\":\"event\"}\n").ok);
}

TEST_CASE("matches are deterministic", "[match]") {
    const CertPtr cert = ladder(R("17/16")).back();
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
        auto m = recursive_strategy(cert);
        auto a = random_adversary(77, 8);
        std::string text = trace_to_jsonl(run_match(*m, *a, {cert->height, 1, 1, cert->target()}));
        if (rep == 0) first = text;
        else CHECK(text == first);
    }
}

TEST_CASE("round cap gives Undecided", "[match]") {
    MatchTrace t = dodger_match(2);
    CHECK(t.verdict.kind == VerdictKind::Undecided);
    CHECK(t.rounds == 2);
    CHECK(verify_trace(trace_to_jsonl(t)).ok);
}

TEST_CASE("illegal moves and exceptions lose for the mover", "[match]") {
    GameConfig c{1, 1, 1, 1};
    {
        Overspender m;
        auto a = silent();
        MatchTrace t = run_match(m, *a, c);
        CHECK(t.verdict.kind == VerdictKind::AWins);
        CHECK(t.verdict.reason.find("illegal M move") == 0);
        REQUIRE(t.events.front().error);
        CHECK(t.events.front().error->kind == MoveErrorKind::BudgetExceeded);
        CHECK(verify_trace(trace_to_jsonl(t)).ok);
    }
    {
        Thrower m;
        auto a = silent();
        MatchTrace t = run_match(m, *a, c);
        CHECK(t.verdict.kind == VerdictKind::AWins);
        CHECK(t.verdict.reason == "M resigned: boom");
        CHECK(verify_trace(trace_to_jsonl(t)).ok);
    }
    {
        auto m = trivial_strategy();
        auto a = scripted({{Player::A, {{N("0"), R("3/4")}, {N("1"), R("3/4")}}}});
        MatchTrace t = run_match(*m, *a, c);
        CHECK(t.verdict.kind == VerdictKind::MWins);
        CHECK(t.verdict.reason.find("illegal A move") == 0);
        CHECK(verify_trace(trace_to_jsonl(t)).ok);
    }
    {
        // a lone weight that A covers in full
        auto m = OneShotStrategy::spread(0);
        auto a = scripted({});
        MatchTrace t = run_match(*m, *a, {1, 1, 1, 2});
        CHECK(t.verdict.kind == VerdictKind::AWins);
        CHECK(t.verdict.reason.find("M-failed") == 0);
    }
}

TEST_CASE("grace counter restarts when the claim moves", "[match]") {
    const CertPtr cert = ladder(R("17/16")).back();
    auto m = recursive_strategy(cert);
    auto a = proportional_online();
    MatchOptions opt;
    opt.caps.grace = 3;
    MatchTrace t = run_match(*m, *a, {cert->height, 1, 1, cert->target()}, opt);
    REQUIRE(t.verdict.kind == VerdictKind::MWins);
    // the final claim stood for the last grace rounds
    const auto& events = t.events;
    REQUIRE(events.size() >= 6);
    const auto last = events[events.size() - 2].claim;
    for (std::size_t i = events.size() - 6; i < events.size(); i += 2) CHECK(events[i].claim == last);
}
