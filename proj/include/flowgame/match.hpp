#pragma once

#include "flowgame/strategy.hpp"

#include <json.hpp>

#include <functional>
#include <sstream>

namespace flowgame {

struct MatchCaps {
    std::size_t rounds = 1000;
    std::size_t grace = 3;
};

enum class VerdictKind { MWins, AWins, Undecided };

inline const char* verdict_name(VerdictKind k) {
    switch (k) {
        case VerdictKind::MWins: return "MWins";
        case VerdictKind::AWins: return "AWins";
        case VerdictKind::Undecided: return "Undecided";
    }
    return "?";
}

inline VerdictKind parse_verdict(const std::string& s) {
    if (s == "MWins") return VerdictKind::MWins;
    if (s == "AWins") return VerdictKind::AWins;
    if (s == "Undecided") return VerdictKind::Undecided;
    throw std::invalid_argument("unknown verdict: " + s);
}

struct Verdict {
    VerdictKind kind = VerdictKind::Undecided;
    std::string reason;
    NodeId leaf;
    ExtRat sum;
};

struct TraceEvent {
    std::size_t index = 0;
    std::size_t round = 0;
    MoveDelta delta;
    std::optional<MoveError> error;
    std::string resigned;  // non-empty if the mover resigned (strategy failure)
    bool winning_for_m = false;
    std::optional<NodeId> claim;
    std::uint64_t digest = 0;
};

struct MatchTrace {
    nlohmann::json header;
    std::vector<TraceEvent> events;
    Verdict verdict;
    std::size_t rounds = 0;
    std::size_t m_moves = 0;
};

// ---- JSON ------------------------------------------------------------------

inline nlohmann::json config_to_json(const GameConfig& c) {
    nlohmann::json j;
    j["height"] = c.unbounded() ? nlohmann::json("unbounded") : nlohmann::json(c.height);
    j["root_flow"] = format_rat(c.root_flow);
    j["budget"] = format_rat(c.budget);
    j["target"] = format_rat(c.target);
    return j;
}

inline GameConfig config_from_json(const nlohmann::json& j) {
    GameConfig c;
    const auto& h = j.at("height");
    c.height = h.is_string() ? (h.get<std::string>() == "unbounded" ? kUnboundedHeight
                                                                    : throw std::invalid_argument("bad height"))
                             : h.get<std::size_t>();
    c.root_flow = parse_rat(j.at("root_flow").get<std::string>());
    c.budget = parse_rat(j.at("budget").get<std::string>());
    c.target = parse_rat(j.at("target").get<std::string>());
    c.validate();
    return c;
}

inline nlohmann::json updates_to_json(const std::vector<Update>& ups) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& u : ups) arr.push_back({{"node", u.node.str()}, {"value", format_rat(u.value)}});
    return arr;
}

inline std::vector<Update> updates_from_json(const nlohmann::json& arr) {
    std::vector<Update> out;
    for (const auto& e : arr)
        out.push_back({NodeId::parse(e.at("node").get<std::string>()), parse_rat(e.at("value").get<std::string>())});
    return out;
}

inline nlohmann::json event_to_json(const TraceEvent& e) {
    nlohmann::json j;
    j["type"] = "event";
    j["index"] = e.index;
    j["round"] = e.round;
    j["player"] = player_name(e.delta.player);
    j["updates"] = updates_to_json(e.delta.updates);
    j["legal"] = !e.error && e.resigned.empty();
    j["error"] = e.error ? nlohmann::json{{"kind", error_name(e.error->kind)}, {"node", e.error->node.str()}}
                         : nlohmann::json(nullptr);
    j["resigned"] = e.resigned.empty() ? nlohmann::json(nullptr) : nlohmann::json(e.resigned);
    j["winning_for_m"] = e.winning_for_m;
    j["claim"] = e.claim ? nlohmann::json(e.claim->str()) : nlohmann::json(nullptr);
    j["digest"] = hex64(e.digest);
    return j;
}

inline MoveErrorKind parse_error_kind(const std::string& s) {
    for (auto k : {MoveErrorKind::DecreaseRejected, MoveErrorKind::BudgetExceeded, MoveErrorKind::FlowViolation,
                   MoveErrorKind::RootFlowChanged, MoveErrorKind::OutOfTree})
        if (s == error_name(k)) return k;
    throw std::invalid_argument("unknown move error: " + s);
}

inline TraceEvent event_from_json(const nlohmann::json& j) {
    TraceEvent e;
    e.index = j.at("index").get<std::size_t>();
    e.round = j.at("round").get<std::size_t>();
    const std::string p = j.at("player").get<std::string>();
    if (p != "M" && p != "A") throw std::invalid_argument("bad player: " + p);
    e.delta.player = p == "M" ? Player::M : Player::A;
    e.delta.updates = updates_from_json(j.at("updates"));
    if (!j.at("error").is_null())
        e.error = MoveError{parse_error_kind(j.at("error").at("kind").get<std::string>()),
                            NodeId::parse(j.at("error").at("node").get<std::string>())};
    if (j.contains("resigned") && !j.at("resigned").is_null()) e.resigned = j.at("resigned").get<std::string>();
    e.winning_for_m = j.at("winning_for_m").get<bool>();
    if (!j.at("claim").is_null()) e.claim = NodeId::parse(j.at("claim").get<std::string>());
    e.digest = std::stoull(j.at("digest").get<std::string>(), nullptr, 16);
    return e;
}

inline nlohmann::json footer_to_json(const MatchTrace& t) {
    nlohmann::json j;
    j["type"] = "footer";
    j["verdict"] = verdict_name(t.verdict.kind);
    j["reason"] = t.verdict.reason;
    j["leaf"] = t.verdict.leaf.str();
    j["sum"] = t.verdict.sum.str();
    j["rounds"] = t.rounds;
    j["m_moves"] = t.m_moves;
    return j;
}

inline std::string trace_to_jsonl(const MatchTrace& t) {
    std::string out = t.header.dump() + "\n";
    for (const auto& e : t.events) out += event_to_json(e).dump() + "\n";
    out += footer_to_json(t).dump() + "\n";
    return out;
}

inline MatchTrace trace_from_jsonl(const std::string& text) {
    MatchTrace t;
    std::istringstream in(text);
    std::string line;
    bool have_header = false, have_footer = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (have_footer) throw std::invalid_argument("content after footer at line " + std::to_string(lineno));
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": " + ex.what());
        }
        const std::string type = j.at("type").get<std::string>();
        if (!have_header) {
            if (type != "header") throw std::invalid_argument("trace must start with a header");
            if (j.at("format").get<int>() != 1) throw std::invalid_argument("unsupported trace format");
            t.header = j;
            have_header = true;
        } else if (type == "event") {
            t.events.push_back(event_from_json(j));
        } else if (type == "footer") {
            t.verdict.kind = parse_verdict(j.at("verdict").get<std::string>());
            t.verdict.reason = j.at("reason").get<std::string>();
            t.verdict.leaf = NodeId::parse(j.at("leaf").get<std::string>());
            t.verdict.sum = ExtRat::parse(j.at("sum").get<std::string>());
            t.rounds = j.at("rounds").get<std::size_t>();
            t.m_moves = j.at("m_moves").get<std::size_t>();
            have_footer = true;
        } else {
            throw std::invalid_argument("unknown record type '" + type + "' at line " + std::to_string(lineno));
        }
    }
    if (!have_header || !have_footer) throw std::invalid_argument("trace is missing its header or footer");
    return t;
}

// ---- judging -----------------------------------------------------------------

/// Applies the end-of-match rules to the sequence of moves. Shared by the
/// match runner and the replay verifier.
class Judge {
public:
    Judge(const GameConfig& config, std::size_t grace) : config_(config), grace_(grace) {}

    NodeId pad(const NodeId& x) const { return config_.unbounded() ? x : x.padded(config_.height); }

    /// Leaf named in an M verdict: the claim if it meets the target,
    /// otherwise the best leaf.
    LeafSum verdict_leaf(const GameState& s, const std::optional<NodeId>& claim) const {
        if (claim) {
            ExtRat sum = prefix_sum(s, *claim);
            if (sum >= ExtRat(config_.target)) return {*claim, sum};
        }
        return best_leaf(s);
    }

    std::optional<Verdict> after_m(const GameState& /*s*/, const TraceEvent& e) {
        if (!e.resigned.empty()) return Verdict{VerdictKind::AWins, "M resigned: " + e.resigned, {}, {}};
        if (e.error) return Verdict{VerdictKind::AWins, "illegal M move: " + e.error->message(), {}, {}};
        if (!e.delta.is_pass()) ++m_moves_;
        if (e.claim != standing_) {
            standing_ = e.claim;
            counter_ = 0;
        }
        if (!e.winning_for_m) return Verdict{VerdictKind::AWins, "M-failed: no winning position after M's move", {}, {}};
        claim_ = e.claim;
        return std::nullopt;
    }

    std::optional<Verdict> after_a(const GameState& s, const TraceEvent& e) {
        auto m_verdict = [&](std::string why) {
            LeafSum ls = verdict_leaf(s, claim_);
            return Verdict{VerdictKind::MWins, std::move(why), ls.leaf, ls.sum};
        };
        if (!e.resigned.empty()) return m_verdict("A resigned: " + e.resigned);
        if (e.error) return m_verdict("illegal A move: " + e.error->message());
        bool stands = e.winning_for_m && claim_ && prefix_sum(s, *claim_) >= ExtRat(config_.target);
        counter_ = stands ? counter_ + 1 : 0;
        if (counter_ >= grace_) return m_verdict("A did not restore for " + std::to_string(grace_) + " turns");
        return std::nullopt;
    }

    Verdict at_cap(const GameState& s) const {
        LeafSum ls = best_leaf(s);
        return Verdict{VerdictKind::Undecided, "round cap reached", ls.leaf, ls.sum};
    }

    std::size_t m_moves() const { return m_moves_; }

private:
    GameConfig config_;
    std::size_t grace_;
    std::size_t counter_ = 0;
    std::size_t m_moves_ = 0;
    std::optional<NodeId> standing_;
    std::optional<NodeId> claim_;
};

// ---- running -----------------------------------------------------------------

struct MatchOptions {
    MatchCaps caps;
    nlohmann::json header_extra = nlohmann::json::object();  // merged into the header
    /// Called after every legal M move (round, state); used by builders that
    /// watch the branch.
    std::function<void(std::size_t, const GameState&)> on_m_move;
};

struct MatchResult {
    MatchTrace trace;
    GameState state;
};

inline MatchResult run_match_full(Strategy& m, Strategy& a, const GameConfig& config, const MatchOptions& opt = {}) {
    if (m.player() != Player::M || a.player() != Player::A) throw std::invalid_argument("strategy roles mismatch");
    MatchResult r{MatchTrace{}, GameState(config)};
    GameState& state = r.state;
    MatchTrace& t = r.trace;
    t.header = opt.header_extra;
    t.header["type"] = "header";
    t.header["format"] = 1;
    t.header["kind"] = config.unbounded() ? "layered" : "finite";
    t.header["config"] = config_to_json(config);
    t.header["m"] = m.id();
    t.header["a"] = a.id();
    t.header["grace"] = opt.caps.grace;
    t.header["round_cap"] = opt.caps.rounds;
    Judge judge(config, opt.caps.grace);
    auto finish = [&](Verdict v, std::size_t round) {
        t.verdict = std::move(v);
        t.rounds = round;
        t.m_moves = judge.m_moves();
        return std::move(r);
    };
    auto turn = [&](Strategy& s, Player p, std::size_t round, const GameView& view) {
        TraceEvent e;
        e.index = t.events.size();
        e.round = round;
        e.delta.player = p;
        try {
            Reply reply = s.on_event(view, StrategyEvent::your_turn());
            if (reply.resign) e.resigned = "resigned";
            else e.delta.updates = std::move(reply.updates);
        } catch (const std::exception& ex) {
            e.resigned = ex.what();
        }
        if (e.resigned.empty()) e.error = state.try_apply(e.delta);
        return e;
    };
    for (std::size_t round = 1; round <= opt.caps.rounds; ++round) {
        GameView mview = GameView::top(state);
        TraceEvent em = turn(m, Player::M, round, mview);
        if (em.resigned.empty() && !em.error) {
            em.winning_for_m = is_winning_for_M(state);
            try {
                auto c = m.claim(mview);
                if (c) em.claim = judge.pad(*c);
            } catch (const std::exception&) {
                em.claim.reset();  // no standing claim this round
            }
        } else {
            em.winning_for_m = is_winning_for_M(state);
        }
        em.digest = state.digest();
        t.events.push_back(em);
        if (auto v = judge.after_m(state, em)) return finish(std::move(*v), round);
        if (opt.on_m_move) opt.on_m_move(round, state);

        GameView aview = GameView::top(state);
        a.on_event(aview, StrategyEvent::opponent_moved(t.events.back().delta));
        TraceEvent ea = turn(a, Player::A, round, aview);
        ea.winning_for_m = is_winning_for_M(state);
        ea.digest = state.digest();
        t.events.push_back(ea);
        if (auto v = judge.after_a(state, ea)) return finish(std::move(*v), round);
        m.on_event(GameView::top(state), StrategyEvent::opponent_moved(t.events.back().delta));
    }
    return finish(judge.at_cap(state), opt.caps.rounds);
}

inline MatchTrace run_match(Strategy& m, Strategy& a, const GameConfig& config, const MatchOptions& opt = {}) {
    return run_match_full(m, a, config, opt).trace;
}

/// A's moves of a trace, for replay through a scripted adversary.
inline std::vector<MoveDelta> a_moves(const MatchTrace& t) {
    std::vector<MoveDelta> out;
    for (const auto& e : t.events)
        if (e.delta.player == Player::A) out.push_back(e.delta);
    return out;
}

// ---- verification --------------------------------------------------------------

struct VerifyReport {
    bool ok = true;
    std::optional<std::size_t> divergence;  // event index (events.size() means the footer)
    std::string message;
    std::size_t events = 0;
};

/// Replays a JSONL trace through a fresh referee: legality, errors, flags,
/// digests, verdict and footer must all agree, and re-serializing the
/// replay must reproduce the input byte for byte.
inline VerifyReport verify_trace(const std::string& text) {
    VerifyReport rep;
    auto fail = [&](std::optional<std::size_t> at, std::string msg) {
        rep.ok = false;
        rep.divergence = at;
        rep.message = std::move(msg);
        return rep;
    };
    MatchTrace t;
    try {
        t = trace_from_jsonl(text);
    } catch (const std::exception& ex) {
        return fail(std::nullopt, std::string("schema error: ") + ex.what());
    }
    rep.events = t.events.size();
    GameConfig config;
    std::size_t grace;
    try {
        config = config_from_json(t.header.at("config"));
        grace = t.header.at("grace").get<std::size_t>();
    } catch (const std::exception& ex) {
        return fail(std::nullopt, std::string("bad header: ") + ex.what());
    }
    GameState state(config);
    Judge judge(config, grace);
    std::optional<Verdict> verdict;
    std::size_t last_round = 0;
    for (std::size_t i = 0; i < t.events.size(); ++i) {
        const TraceEvent& e = t.events[i];
        const std::string at = "event " + std::to_string(i) + ": ";
        if (verdict) return fail(i, at + "event after the match was decided");
        if (e.index != i) return fail(i, at + "index out of sequence");
        const Player expected = i % 2 == 0 ? Player::M : Player::A;
        if (e.delta.player != expected) return fail(i, at + "players do not alternate");
        if (e.round != i / 2 + 1) return fail(i, at + "round number out of sequence");
        last_round = e.round;
        std::optional<MoveError> err;
        if (e.resigned.empty()) {
            err = state.try_apply(e.delta);
        } else if (!e.delta.updates.empty()) {
            return fail(i, at + "resignation carries updates");
        }
        if (err != e.error) {
            return fail(i, at + "legality differs: replay says " + (err ? err->message() : std::string("legal")) +
                               ", trace says " + (e.error ? e.error->message() : std::string("legal")));
        }
        if (is_winning_for_M(state) != e.winning_for_m) return fail(i, at + "winning flag differs");
        if (state.digest() != e.digest) return fail(i, at + "state digest differs");
        if (e.claim && !config.unbounded() && e.claim->depth() != config.height)
            return fail(i, at + "claim is not a leaf");
        verdict = expected == Player::M ? judge.after_m(state, e) : judge.after_a(state, e);
    }
    const std::size_t fi = t.events.size();
    if (!verdict) {
        if (last_round < t.header.at("round_cap").get<std::size_t>())
            return fail(fi, "trace ends before the match was decided");
        verdict = judge.at_cap(state);
    }
    if (verdict->kind != t.verdict.kind) return fail(fi, "verdict differs");
    if (verdict->reason != t.verdict.reason) return fail(fi, "verdict reason differs");
    if (verdict->leaf != t.verdict.leaf || verdict->sum != t.verdict.sum) return fail(fi, "final leaf or sum differs");
    if (verdict->kind == VerdictKind::MWins) {
        ExtRat s = prefix_sum(state, t.verdict.leaf);
        if (s != t.verdict.sum || s < ExtRat(config.target)) return fail(fi, "winning leaf does not meet the target");
    }
    if (t.m_moves != judge.m_moves()) return fail(fi, "M move count differs");
    if (t.rounds != last_round) return fail(fi, "round count differs");
    const std::string again = trace_to_jsonl(t);
    if (again != text) {
        std::istringstream a(again), b(text);
        std::string la, lb;
        std::size_t line = 0;
        while (std::getline(a, la) && std::getline(b, lb) && la == lb) ++line;
        return fail(line == 0 ? std::nullopt : std::optional<std::size_t>(line - 1),
                    "re-serialized trace differs at line " + std::to_string(line + 1));
    }
    return rep;
}

}  // namespace flowgame
