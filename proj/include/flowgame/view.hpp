#pragma once

#include "flowgame/game.hpp"
#include "flowgame/monotone.hpp"

#include <algorithm>

namespace flowgame {

/// A subtree of the global game seen as a unit game.
///
/// Local address y is global address root.y; local m = global m / m_scale and
/// local a = global a / a_scale. A strategy written for budget 1 and root flow
/// 1 plays through the view and its moves come out scaled.
class GameView {
public:
    GameView(const GameState& state, NodeId root, Rat m_scale, Rat a_scale, std::size_t height,
             MarkedBranch* branch = nullptr)
        : state_(&state),
          root_(std::move(root)),
          m_scale_(std::move(m_scale)),
          a_scale_(std::move(a_scale)),
          height_(height),
          branch_(branch) {}

    /// Whole game, normalized by the configured budget and root flow.
    static GameView top(const GameState& state, MarkedBranch* branch = nullptr) {
        const auto& c = state.config();
        return GameView(state, NodeId::root(), c.budget, c.root_flow, c.height, branch);
    }

    const GameState& state() const { return *state_; }
    const NodeId& root() const { return root_; }
    const Rat& m_scale() const { return m_scale_; }
    const Rat& a_scale() const { return a_scale_; }
    std::size_t height() const { return height_; }
    bool unbounded() const { return height_ >= kUnboundedHeight; }
    MarkedBranch* branch() const { return branch_; }

    NodeId global(const NodeId& local) const { return root_.concat(local); }

    Rat m(const NodeId& local) const { return Rat(state_->m(global(local)) / m_scale_); }
    Rat a(const NodeId& local) const { return Rat(state_->a(global(local)) / a_scale_); }

    /// Global update realizing local m(local) = value.
    Update set_m(const NodeId& local, const Rat& value) const {
        return Update{global(local), Rat(value * m_scale_)};
    }

    /// Local view of the subtree at `local_root` with a fraction `share` of
    /// this view's budget and `assumed_flow` (local units) as its root flow.
    GameView scaled(const NodeId& local_root, const Rat& share, const Rat& assumed_flow) const {
        if (sgn(assumed_flow) <= 0) throw std::invalid_argument("assumed flow must be positive");
        if (sgn(share) <= 0) throw std::invalid_argument("budget share must be positive");
        if (!unbounded() && local_root.depth() > height_)
            throw IllegalMove(MoveError{MoveErrorKind::OutOfTree, global(local_root)});
        const std::size_t h = unbounded() ? kUnboundedHeight : height_ - local_root.depth();
        return GameView(*state_, global(local_root), m_scale_ * share, a_scale_ * assumed_flow, h,
                        branch_);
    }

    GameView with_height(std::size_t h) const {
        GameView v = *this;
        v.height_ = h;
        return v;
    }

    GameView with_branch(MarkedBranch* b) const {
        GameView v = *this;
        v.branch_ = b;
        return v;
    }

    /// Sum over local ancestors of `local` (inclusive), in local units.
    ExtRat prefix_sum(const NodeId& local) const {
        ExtRat total;
        for (std::size_t d = 0; d <= local.depth(); ++d) {
            NodeId g = global(local.prefix(d));
            const Rat& w = state_->m(g);
            if (sgn(w) != 0) total += ratio(w, state_->a(g));
        }
        return to_local(total);
    }

    /// Best leaf of the subtree (local address, padded to the local height)
    /// and its in-subtree sum in local units.
    LeafSum best_leaf() const {
        ChainMax best = max_chain(*state_, root_);
        NodeId leaf = best.node ? best.node->relative_to(root_) : NodeId();
        if (!unbounded()) leaf = leaf.padded(height_);
        return {leaf, to_local(best.sum)};
    }

    /// Published watermark, relative to this view's root depth (-1 if none
    /// of the published 1s lies below the root).
    long long local_watermark() const {
        if (!branch_) return -1;
        long long w = watermark(*branch_) - static_cast<long long>(root_.depth());
        return w < 0 ? -1 : w;
    }

private:
    ExtRat to_local(const ExtRat& global_sum) const {
        if (global_sum.is_infinite()) return global_sum;
        return ExtRat(Rat(global_sum.value() * a_scale_ / m_scale_));
    }

    const GameState* state_;
    NodeId root_;
    Rat m_scale_;
    Rat a_scale_;
    std::size_t height_;
    MarkedBranch* branch_;
};

/// Scaled view of the subtree at `subtree_root` (global address) of the
/// normalized game: budget share and assumed flow are in unit-game terms.
inline GameView scale_view(const GameState& state, const NodeId& subtree_root, const Rat& assumed_flow,
                           const Rat& budget_share) {
    return GameView::top(state).scaled(subtree_root, budget_share, assumed_flow);
}

/// Overlay of planned a-values on top of a state, used by adversaries to
/// build legal flow increases.
class FlowPlanner {
public:
    explicit FlowPlanner(const GameState& state) : state_(&state) {}

    const GameState& state() const { return *state_; }

    Rat a(const NodeId& x) const {
        auto it = planned_.find(x);
        return it != planned_.end() ? it->second : state_->a(x);
    }

    bool has_children(const NodeId& x) const { return x.depth() < state_->config().height; }

    Rat slack(const NodeId& x) const {
        if (!has_children(x)) return a(x);
        return a(x) - a(x.child(false)) - a(x.child(true));
    }

    /// Largest t such that a(x) can be raised by t without touching a(root).
    Rat max_pour(const NodeId& x) const {
        Rat total{0};
        if (x.is_root()) return total;
        for (std::size_t d = 0; d < x.depth(); ++d) total += slack(x.prefix(d));
        return total;
    }

    /// Raises a(x) by t, using the nearest ancestor slack first.
    void pour(const NodeId& x, Rat t) {
        if (sgn(t) < 0) throw std::invalid_argument("negative pour");
        if (sgn(t) == 0) return;
        if (t > max_pour(x)) throw std::logic_error("pour exceeds available flow at '" + x.str() + "'");
        NodeId cur = x;
        while (sgn(t) > 0) {
            NodeId p = cur.parent();
            Rat s = slack(p);
            planned_[cur] = a(cur) + t;
            if (s >= t) break;
            t -= s;
            cur = p;
        }
    }

    /// Raises a(x) to at least v, as far as the available flow allows.
    /// Returns the amount actually added.
    Rat raise_to(const NodeId& x, const Rat& v) {
        Rat need = v - a(x);
        if (sgn(need) <= 0) return Rat(0);
        Rat t = std::min(need, max_pour(x));
        pour(x, t);
        return t;
    }

    /// Sets a planned value directly; the caller keeps it legal.
    void set(const NodeId& x, Rat v) { planned_[x] = std::move(v); }

    std::vector<Update> updates() const {
        std::vector<Update> out;
        for (const auto& [x, v] : planned_)
            if (v != state_->a(x)) out.push_back({x, v});
        return out;
    }

private:
    const GameState* state_;
    std::map<NodeId, Rat> planned_;
};

}  // namespace flowgame
