#pragma once

#include "flowgame/adversaries.hpp"
#include "flowgame/match.hpp"
#include "flowgame/monotone.hpp"

#include <sstream>

namespace flowgame {

/// Certificates for layers with quotas 2^-e: the last rung of the ladder to 2^e.
inline std::vector<CertPtr> layer_certs(const std::vector<unsigned>& exponents) {
    std::vector<CertPtr> out;
    for (unsigned e : exponents) out.push_back(ladder(pow2(static_cast<long>(e))).back());
    return out;
}

inline std::vector<unsigned> default_exponents(std::size_t layers) {
    std::vector<unsigned> e;
    for (std::size_t j = 1; j <= layers; ++j) e.push_back(static_cast<unsigned>(j));
    return e;
}

/// M strategy for the unbounded game. Layer j plays its certificate with
/// budget share 2^-e_j and assumed root flow 1 (in-subtree sum >= 1), rooted
/// above the vertex marked by layer j-1. When a layer's mark changes, all
/// layers above it are discarded and restarted. A layer whose move would
/// push M past the budget is held back until it is restarted.
class LayeredDriver : public MStrategy {
public:
    LayeredDriver(std::vector<CertPtr> certs, std::vector<unsigned> exponents, bool monotone)
        : monotone_(monotone), exponents_(std::move(exponents)) {
        if (certs.empty() || certs.size() != exponents_.size()) throw std::invalid_argument("one cert per layer");
        for (std::size_t j = 0; j < certs.size(); ++j) {
            if (certs[j]->target() < pow2(static_cast<long>(exponents_[j])))
                throw std::invalid_argument("layer cert falls short of 2^e");
            layers_.push_back(Layer{std::move(certs[j]), {}, {}, {}});
        }
    }

    std::string id() const override {
        std::string s = monotone_ ? "layered_monotone(" : "layered(";
        for (std::size_t j = 0; j < exponents_.size(); ++j) s += (j ? "," : "") + std::to_string(exponents_[j]);
        return s + ")";
    }

    Reply on_event(const GameView& view, const StrategyEvent& event) override {
        if (event.kind == EventKind::OpponentMoved) {
            for (std::size_t j = 0; j < layers_.size() && layers_[j].strat; ++j)
                layers_[j].strat->on_event(layer_view(view, j), event);
            return {};
        }
        return Reply{play(view)};
    }

    std::optional<NodeId> claim(const GameView& /*view*/) const override {
        const Layer* top = deepest();
        if (!top) return std::nullopt;
        return top->mark;
    }

    std::size_t layers() const { return layers_.size(); }
    /// Number of layers whose marks are all in place.
    std::size_t active() const {
        std::size_t j = 0;
        while (j < layers_.size() && layers_[j].mark) ++j;
        return j;
    }
    const std::optional<NodeId>& mark(std::size_t j) const { return layers_.at(j).mark; }
    const NodeId& root(std::size_t j) const { return layers_.at(j).root; }
    std::size_t restarts(std::size_t j) const { return layers_.at(j).restarts; }
    bool starved(std::size_t j) const { return layers_.at(j).starved; }

    /// Every position ever published (monotone play).
    const MarkedBranch& published() const { return published_; }

    /// Current branch: the path to the deepest mark.
    MarkedBranch current_branch() const {
        MarkedBranch b;
        if (const Layer* top = deepest()) b.add(*top->mark);
        return b;
    }

    ExtRat partial_sum(const GameState& s) const {
        const Layer* top = deepest();
        return top ? prefix_sum(s, *top->mark) : ExtRat();
    }

    /// Per-layer part of the partial sum: layer j covers the path between
    /// mark j-1 (exclusive) and mark j.
    std::vector<ExtRat> layer_sums(const GameState& s) const {
        std::vector<ExtRat> out;
        const Layer* top = deepest();
        if (!top) return out;
        const NodeId& path = *top->mark;
        std::size_t from = 0;
        for (std::size_t j = 0; j < active(); ++j) {
            const std::size_t to = layers_[j].mark->depth();
            ExtRat sum;
            for (std::size_t d = from; d <= to; ++d) {
                NodeId x = path.prefix(d);
                const Rat& w = s.m(x);
                if (sgn(w) != 0) sum += ratio(w, s.a(x));
            }
            out.push_back(sum);
            from = to + 1;
        }
        return out;
    }

protected:
    std::vector<Update> play(const GameView& view) override {
        const GameState& s = view.state();
        std::vector<Update> out;
        Rat spent = s.m_total();
        for (std::size_t j = 0; j < layers_.size(); ++j) {
            Layer& ly = layers_[j];
            if (j > 0 && !layers_[j - 1].mark) break;
            if (ly.starved) break;
            if (!ly.strat) start(j);
            GameView lv = layer_view(view, j);
            std::vector<Update> ups = ly.strat->on_event(lv, StrategyEvent::your_turn()).updates;
            Rat add{0};
            for (const auto& u : ups) add += u.value - s.m(u.node);
            if (spent + add > s.config().budget) {
                discard_from(j);
                ly.starved = true;
                break;
            }
            spent += add;
            out.insert(out.end(), ups.begin(), ups.end());
            auto c = ly.strat->claim(lv);
            if (c != ly.mark) {
                ly.mark = std::move(c);
                discard_from(j + 1);
            }
        }
        return out;
    }

private:
    struct Layer {
        CertPtr cert;
        NodeId root;
        StrategyPtr strat;
        std::optional<NodeId> mark;
        std::size_t starts = 0;
        std::size_t restarts = 0;
        bool starved = false;
    };

    const Layer* deepest() const {
        const std::size_t n = active();
        return n == 0 ? nullptr : &layers_[n - 1];
    }

    GameView layer_view(const GameView& view, std::size_t j) const {
        GameView top = view.with_branch(monotone_ ? &published_ : nullptr);
        return top.scaled(layers_[j].root, pow2(-static_cast<long>(exponents_[j])), Rat(1));
    }

    void start(std::size_t j) {
        Layer& ly = layers_[j];
        if (j == 0) {
            ly.root = NodeId::root();
        } else if (monotone_) {
            ly.root = place_subgame_root(RootKind::LayerRestart, published_, {0, -1, *layers_[j - 1].mark});
            published_.add(ly.root);
        } else {
            ly.root = layers_[j - 1].mark->child(false);
        }
        ly.strat = make_level_strategy(ly.cert, monotone_);
        if (ly.starts++ > 0) ++ly.restarts;
    }

    void discard_from(std::size_t j) {
        for (; j < layers_.size(); ++j) {
            layers_[j].strat.reset();
            layers_[j].mark.reset();
            layers_[j].starved = false;
        }
    }

    bool monotone_;
    std::vector<unsigned> exponents_;
    std::vector<Layer> layers_;
    mutable MarkedBranch published_;
};

inline std::unique_ptr<LayeredDriver> layered_driver(const std::vector<unsigned>& exponents, bool monotone = false) {
    return std::make_unique<LayeredDriver>(layer_certs(exponents), exponents, monotone);
}

// ---- c.e. builder ---------------------------------------------------------------

/// Position p enumerated (set to 1) after M's move in round t.
struct Enumeration {
    std::size_t round = 0;
    std::size_t position = 0;
};

struct CeReport {
    Verdict verdict;
    std::size_t rounds = 0;
    MarkedBranch branch;  // everything enumerated
    std::optional<NodeId> mark;
    std::vector<ExtRat> layer_sums;
    ExtRat total;
    std::vector<std::size_t> restarts;
    bool monotone = true;  // branch dominance held every round
    std::string failure;
};

struct CeResult {
    MatchTrace trace;
    std::vector<Enumeration> events;
    CeReport report;
};

/// Runs the monotone layered driver against `a` on the unbounded game with
/// target = number of layers, enumerating branch positions as they are set.
inline CeResult ce_builder(const std::vector<unsigned>& exponents, Strategy& a, const MatchCaps& caps) {
    LayeredDriver m(layer_certs(exponents), exponents, true);
    GameConfig config;
    config.height = kUnboundedHeight;
    config.target = Rat(static_cast<long>(exponents.size()));
    CeResult res;
    CeReport& rep = res.report;
    MarkedBranch emitted, prev;
    MatchOptions opt;
    opt.caps = caps;
    opt.on_m_move = [&](std::size_t round, const GameState&) {
        for (std::size_t p : m.published().ones)
            if (emitted.ones.insert(p).second) res.events.push_back({round, p});
        MarkedBranch cur = m.current_branch();
        if (rep.monotone && !dominates(prev, cur)) {
            rep.monotone = false;
            rep.failure = "round " + std::to_string(round) + ": branch lost a 1";
        }
        if (rep.monotone && !dominates(cur, emitted)) {
            rep.monotone = false;
            rep.failure = "round " + std::to_string(round) + ": branch has a 1 that was never enumerated";
        }
        prev = std::move(cur);
    };
    MatchResult r = run_match_full(m, a, config, opt);
    res.trace = std::move(r.trace);
    rep.verdict = res.trace.verdict;
    rep.rounds = res.trace.rounds;
    rep.branch = emitted;
    rep.mark = m.claim(GameView::top(r.state));
    rep.layer_sums = m.layer_sums(r.state);
    rep.total = m.partial_sum(r.state);
    for (std::size_t j = 0; j < m.layers(); ++j) rep.restarts.push_back(m.restarts(j));
    return res;
}

inline std::string enumeration_to_jsonl(const std::vector<Enumeration>& events) {
    std::string out;
    for (const auto& e : events) out += nlohmann::json{{"round", e.round}, {"set", e.position}}.dump() + "\n";
    return out;
}

inline std::vector<Enumeration> enumeration_from_jsonl(const std::string& text) {
    std::vector<Enumeration> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        out.push_back({j.at("round").get<std::size_t>(), j.at("set").get<std::size_t>()});
    }
    return out;
}

inline nlohmann::json ce_report_to_json(const CeReport& r) {
    nlohmann::json j;
    j["format"] = 1;
    j["type"] = "ce_report";
    j["verdict"] = verdict_name(r.verdict.kind);
    j["reason"] = r.verdict.reason;
    j["rounds"] = r.rounds;
    j["branch"] = r.branch.str();
    j["mark"] = r.mark ? nlohmann::json(r.mark->str()) : nlohmann::json(nullptr);
    j["layer_sums"] = nlohmann::json::array();
    for (const auto& s : r.layer_sums) j["layer_sums"].push_back(s.str());
    j["total"] = r.total.str();
    j["restarts"] = r.restarts;
    j["monotone"] = r.monotone;
    if (!r.failure.empty()) j["failure"] = r.failure;
    return j;
}

struct EnumerationCheck {
    bool ok = true;
    std::string message;
};

/// Replay check of an enumeration against its match trace: positions are
/// enumerated once, rounds never go back, every mark in the trace is a 1-set
/// already enumerated by its round, and successive marks dominate each other.
inline EnumerationCheck verify_enumeration(const std::vector<Enumeration>& events, const MatchTrace& trace,
                                           const std::string& final_branch) {
    auto fail = [](std::string msg) { return EnumerationCheck{false, std::move(msg)}; };
    std::set<std::size_t> seen;
    std::size_t last = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i].round < last) return fail("enumeration " + std::to_string(i) + " goes back in time");
        if (!seen.insert(events[i].position).second)
            return fail("position " + std::to_string(events[i].position) + " enumerated twice");
        last = events[i].round;
    }
    MarkedBranch all;
    all.ones = seen;
    if (all.str() != final_branch) return fail("final branch differs from the enumeration");
    std::size_t k = 0;
    std::set<std::size_t> upto;
    std::optional<NodeId> prev;
    for (const auto& e : trace.events) {
        if (e.delta.player != Player::M || !e.claim) continue;
        while (k < events.size() && events[k].round <= e.round) upto.insert(events[k++].position);
        for (std::size_t p : e.claim->ones())
            if (!upto.count(p))
                return fail("round " + std::to_string(e.round) + ": mark has position " + std::to_string(p) +
                            " not yet enumerated");
        if (prev && !dominates(*prev, *e.claim))
            return fail("round " + std::to_string(e.round) + ": mark does not dominate its predecessor");
        prev = e.claim;
    }
    return {};
}

}  // namespace flowgame
