#pragma once

#include "flowgame/certificates.hpp"
#include "flowgame/view.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace flowgame {

enum class EventKind { OpponentMoved, YourTurn };

struct StrategyEvent {
    EventKind kind = EventKind::YourTurn;
    const MoveDelta* delta = nullptr;  // set for OpponentMoved

    static StrategyEvent your_turn() { return {}; }
    static StrategyEvent opponent_moved(const MoveDelta& d) { return {EventKind::OpponentMoved, &d}; }
};

/// Global-address updates for the mover, or a resignation.
struct Reply {
    std::vector<Update> updates;
    bool resign = false;
};

class Strategy {
public:
    virtual ~Strategy() = default;

    virtual Player player() const = 0;
    virtual std::string id() const = 0;

    /// Reacts to an event; only the reply to YourTurn is played.
    virtual Reply on_event(const GameView& view, const StrategyEvent& event) {
        if (event.kind == EventKind::OpponentMoved) {
            observe(view, *event.delta);
            return {};
        }
        return Reply{play(view)};
    }

    /// Standing victory claim (global vertex) for the position in `view`.
    virtual std::optional<NodeId> claim(const GameView& /*view*/) const { return std::nullopt; }

protected:
    virtual void observe(const GameView& /*view*/, const MoveDelta& /*delta*/) {}
    virtual std::vector<Update> play(const GameView& view) = 0;
};

using StrategyPtr = std::unique_ptr<Strategy>;

class MStrategy : public Strategy {
public:
    Player player() const override { return Player::M; }
};

/// Raised when the recursive strategy would have to advance past subgame n.
struct InternalExhaustion : std::logic_error {
    using std::logic_error::logic_error;
};

/// m(root) = whole budget, then pass forever.
class TrivialStrategy : public MStrategy {
public:
    std::string id() const override { return "trivial"; }

    std::optional<NodeId> claim(const GameView& view) const override {
        if (!moved_) return std::nullopt;
        return view.global(NodeId::root());
    }

protected:
    std::vector<Update> play(const GameView& view) override {
        if (moved_) return {};
        moved_ = true;
        return {view.set_m(NodeId::root(), Rat(1))};
    }

private:
    bool moved_ = false;
};

/// Local move of the height-2 toy strategy for target `k` in the position
/// seen through `view`. Depends only on the position.
inline std::vector<Update> toy_reply(const GameView& view, const Rat& k) {
    static const NodeId v0 = NodeId::parse("0"), v00 = NodeId::parse("00"), v01 = NodeId::parse("01"),
                        v1 = NodeId::parse("1");
    if (sgn(view.m(v0)) == 0) return {view.set_m(v0, Rat(1, 4)), view.set_m(v00, Rat(1, 4))};
    if (view.best_leaf().sum >= ExtRat(k)) return {};
    if (sgn(view.m(v1)) != 0 || sgn(view.m(v01)) != 0) return {};  // already committed
    if (view.a(v0) >= 1 - 1 / (2 * k)) return {view.set_m(v1, Rat(1, 2))};
    return {view.set_m(v01, Rat(1, 2))};
}

class ToyStrategy : public MStrategy {
public:
    explicit ToyStrategy(Rat k) : k_(std::move(k)) {}

    std::string id() const override { return "toy(" + format_rat(k_) + ")"; }

    std::optional<NodeId> claim(const GameView& view) const override {
        if (sgn(view.m(NodeId::parse("0"))) == 0) return std::nullopt;
        return view.global(view.best_leaf().leaf);
    }

protected:
    std::vector<Update> play(const GameView& view) override {
        if (view.height() < 2) throw std::invalid_argument("toy strategy needs height >= 2");
        return toy_reply(view, k_);
    }

private:
    Rat k_;
};

/// Plays a fixed set of local weights once, then passes.
class OneShotStrategy : public MStrategy {
public:
    explicit OneShotStrategy(std::vector<std::pair<NodeId, Rat>> weights) : weights_(std::move(weights)) {}

    /// The whole budget spread evenly over the 2^depth vertices at `depth`.
    static std::unique_ptr<OneShotStrategy> spread(std::size_t depth) {
        std::vector<std::pair<NodeId, Rat>> w;
        const std::size_t count = std::size_t{1} << depth;
        for (std::size_t i = 0; i < count; ++i) {
            NodeId x;
            for (std::size_t b = depth; b-- > 0;) x.push_back((i >> b) & 1U);
            w.emplace_back(x, Rat(1, static_cast<unsigned long>(count)));
        }
        return std::make_unique<OneShotStrategy>(std::move(w));
    }

    std::string id() const override { return "one_shot"; }

    std::optional<NodeId> claim(const GameView& view) const override {
        if (!moved_) return std::nullopt;
        return view.global(view.best_leaf().leaf);
    }

protected:
    std::vector<Update> play(const GameView& view) override {
        if (moved_) return {};
        moved_ = true;
        std::vector<Update> out;
        for (const auto& [x, w] : weights_) out.push_back(view.set_m(x, w));
        return out;
    }

private:
    std::vector<std::pair<NodeId, Rat>> weights_;
    bool moved_ = false;
};

/// Runs `inner` in the subtree at `root` with a share of the budget and an
/// assumed root flow (both in the units of the enclosing view).
class ScaledStrategy : public MStrategy {
public:
    ScaledStrategy(StrategyPtr inner, NodeId root, Rat share, Rat assumed_flow)
        : inner_(std::move(inner)), root_(std::move(root)), share_(std::move(share)), flow_(std::move(assumed_flow)) {}

    std::string id() const override {
        return "scaled(" + inner_->id() + "," + root_.str() + "," + format_rat(share_) + "," + format_rat(flow_) + ")";
    }

    Reply on_event(const GameView& view, const StrategyEvent& event) override {
        return inner_->on_event(inner_view(view), event);
    }

    std::optional<NodeId> claim(const GameView& view) const override { return inner_->claim(inner_view(view)); }

protected:
    std::vector<Update> play(const GameView& view) override {
        return inner_->on_event(inner_view(view), StrategyEvent::your_turn()).updates;
    }

private:
    GameView inner_view(const GameView& view) const { return view.scaled(root_, share_, flow_); }

    StrategyPtr inner_;
    NodeId root_;
    Rat share_;
    Rat flow_;
};

inline StrategyPtr scaled(StrategyPtr inner, NodeId root, Rat share, Rat assumed_flow) {
    return std::make_unique<ScaledStrategy>(std::move(inner), std::move(root), std::move(share),
                                            std::move(assumed_flow));
}

inline StrategyPtr make_level_strategy(const CertPtr& cert, bool monotone);

/// The (k+eps)-strategy of a certificate. In monotone mode subgame roots are
/// padded with 1s past the published branch watermark so that successive
/// claims only ever gain 1s.
class RecursiveStrategy : public MStrategy {
public:
    RecursiveStrategy(CertPtr cert, bool monotone) : cert_(std::move(cert)), monotone_(monotone) {
        if (!cert_ || cert_->is_base()) throw std::invalid_argument("recursive strategy needs a non-base cert");
    }

    std::string id() const override {
        return std::string(monotone_ ? "monotone" : "recursive") + "(" + format_rat(cert_->target()) + "," +
               cert_hash(*cert_) + ")";
    }

    const StrategyCert& cert() const { return *cert_; }
    bool in_threat() const { return threat_; }
    long subgame() const { return i_; }
    const NodeId& child_root() const { return child_root_; }

    std::optional<NodeId> claim(const GameView& view) const override {
        if (!child_) return std::nullopt;
        return child_->claim(child_view(view));
    }

protected:
    std::vector<Update> play(const GameView& view) override {
        std::vector<Update> out;
        if (!child_) {
            out.push_back(view.set_m(NodeId::parse("0"), cert_->eps));
            start_subgame(view, 1);
        } else {
            resolve_triggers(view);
        }
        auto rest = child_->on_event(child_view(view), StrategyEvent::your_turn()).updates;
        out.insert(out.end(), std::make_move_iterator(rest.begin()), std::make_move_iterator(rest.end()));
        return out;
    }

private:
    const Rat& d(long i) const { return cert_->d[static_cast<std::size_t>(i - 1)]; }
    const Rat& quota(long i) const { return cert_->aq[static_cast<std::size_t>(i - 1)]; }

    void resolve_triggers(const GameView& view) {
        while (!threat_) {
            if (i_ < cert_->n && view.a(NodeId::parse("0")) >= d(i_)) {
                start_threat(view);
                return;
            }
            if (view.a(child_root_) >= quota(i_)) {
                if (i_ == cert_->n) throw InternalExhaustion("advance past the last subgame");
                start_subgame(view, i_ + 1);
                continue;
            }
            return;
        }
    }

    void start_subgame(const GameView& view, long i) {
        i_ = i;
        NodeId root;
        if (monotone_) {
            const MarkedBranch none;
            root = place_subgame_root(RootKind::Left, view.branch() ? *view.branch() : none,
                                      {view.root().depth(), last_run_, {}});
            last_run_ = static_cast<long long>(root.depth()) - 2;
        } else {
            root = NodeId::parse("0");
            root.append_run(true, static_cast<std::size_t>(i - 1));
            root.push_back(false);
        }
        Rat share = (1 - cert_->eps) / cert_->n;
        launch(view, std::move(root), std::move(share), quota(i));
    }

    void start_threat(const GameView& view) {
        threat_ = true;
        const MarkedBranch none;
        NodeId root = monotone_ ? place_subgame_root(RootKind::Threat, view.branch() ? *view.branch() : none,
                                                     {view.root().depth(), -1, {}})
                                : NodeId::parse("1");
        const Rat frac = make_rat(i_, cert_->n);
        launch(view, std::move(root), Rat((1 - cert_->eps) * (1 - frac)), Rat(1 - d(i_)));
    }

    void launch(const GameView& view, NodeId root, Rat share, Rat flow) {
        child_root_ = std::move(root);
        child_share_ = std::move(share);
        child_flow_ = std::move(flow);
        child_ = make_level_strategy(cert_->child, monotone_);
        if (monotone_ && view.branch()) view.branch()->add(view.global(child_root_));
    }

    GameView child_view(const GameView& view) const { return view.scaled(child_root_, child_share_, child_flow_); }

    CertPtr cert_;
    bool monotone_;
    long i_ = 0;
    bool threat_ = false;
    long long last_run_ = -1;
    NodeId child_root_;
    Rat child_share_;
    Rat child_flow_;
    StrategyPtr child_;
};

inline StrategyPtr make_level_strategy(const CertPtr& cert, bool monotone) {
    if (cert->is_base()) return std::make_unique<TrivialStrategy>();
    return std::make_unique<RecursiveStrategy>(cert, monotone);
}

/// Monotone recursive strategy on its own tree: owns the published branch
/// and records every marked vertex.
class MonotoneStrategy : public MStrategy {
public:
    explicit MonotoneStrategy(const CertPtr& cert) : inner_(make_level_strategy(cert, true)) {}

    std::string id() const override { return inner_->id(); }

    Reply on_event(const GameView& view, const StrategyEvent& event) override {
        if (event.kind == EventKind::OpponentMoved) return inner_->on_event(own(view), event);
        Reply r = inner_->on_event(own(view), event);
        if (auto c = inner_->claim(own(view))) record_.mark(*c);
        return r;
    }

    std::optional<NodeId> claim(const GameView& view) const override { return inner_->claim(own(view)); }

    const MarkedBranch& branch() const { return branch_; }
    const MarkRecord& record() const { return record_; }

protected:
    std::vector<Update> play(const GameView& view) override {
        return on_event(view, StrategyEvent::your_turn()).updates;
    }

private:
    GameView own(const GameView& view) const { return view.with_branch(&branch_); }

    StrategyPtr inner_;
    mutable MarkedBranch branch_;
    MarkRecord record_;
};

inline StrategyPtr trivial_strategy() { return std::make_unique<TrivialStrategy>(); }
inline StrategyPtr toy_strategy(Rat k) { return std::make_unique<ToyStrategy>(std::move(k)); }
inline StrategyPtr recursive_strategy(const CertPtr& cert) { return make_level_strategy(cert, false); }
inline std::unique_ptr<MonotoneStrategy> monotone_recursive_strategy(const CertPtr& cert) {
    return std::make_unique<MonotoneStrategy>(cert);
}

}  // namespace flowgame
