#pragma once

#include "flowgame/node_id.hpp"
#include "flowgame/rational.hpp"

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowgame {

enum class Player { M, A };

inline const char* player_name(Player p) { return p == Player::M ? "M" : "A"; }

/// Height used by layered games whose tree grows on demand.
inline constexpr std::size_t kUnboundedHeight = std::numeric_limits<std::size_t>::max() / 2;

struct GameConfig {
    std::size_t height = 0;
    Rat root_flow{1};
    Rat budget{1};
    Rat target{1};

    bool unbounded() const { return height == kUnboundedHeight; }

    void validate() const {
        if (sgn(root_flow) <= 0) throw std::invalid_argument("root flow must be positive");
        if (sgn(budget) <= 0) throw std::invalid_argument("budget must be positive");
        if (sgn(target) < 0) throw std::invalid_argument("target must be non-negative");
    }

    friend bool operator==(const GameConfig&, const GameConfig&) = default;
};

/// "Set weight of `node` to `value`" (absolute, never a decrement).
struct Update {
    NodeId node;
    Rat value;

    friend bool operator==(const Update&, const Update&) = default;
};

struct MoveDelta {
    Player player = Player::M;
    std::vector<Update> updates;

    bool is_pass() const { return updates.empty(); }

    friend bool operator==(const MoveDelta&, const MoveDelta&) = default;
};

enum class MoveErrorKind { DecreaseRejected, BudgetExceeded, FlowViolation, RootFlowChanged, OutOfTree };

inline const char* error_name(MoveErrorKind k) {
    switch (k) {
        case MoveErrorKind::DecreaseRejected: return "DecreaseRejected";
        case MoveErrorKind::BudgetExceeded: return "BudgetExceeded";
        case MoveErrorKind::FlowViolation: return "FlowViolation";
        case MoveErrorKind::RootFlowChanged: return "RootFlowChanged";
        case MoveErrorKind::OutOfTree: return "OutOfTree";
    }
    return "?";
}

struct MoveError {
    MoveErrorKind kind;
    NodeId node;

    std::string message() const {
        return std::string(error_name(kind)) + " at node '" + node.str() + "'";
    }

    friend bool operator==(const MoveError&, const MoveError&) = default;
};

class IllegalMove : public std::runtime_error {
public:
    explicit IllegalMove(MoveError e) : std::runtime_error(e.message()), error_(std::move(e)) {}
    const MoveError& error() const { return error_; }

private:
    MoveError error_;
};

using WeightMap = std::map<NodeId, Rat>;

/// Sparse game position. Absent entries are zero; a(root) is the root flow.
class GameState {
public:
    explicit GameState(GameConfig config) : config_(std::move(config)) {
        config_.validate();
        a_[NodeId::root()] = config_.root_flow;
        digest_ ^= entry_hash(Player::A, NodeId::root(), config_.root_flow);
    }

    const GameConfig& config() const { return config_; }

    const Rat& m(const NodeId& x) const { return lookup(m_, x); }
    const Rat& a(const NodeId& x) const { return lookup(a_, x); }
    const Rat& weight(Player p, const NodeId& x) const { return p == Player::M ? m(x) : a(x); }

    const WeightMap& m_weights() const { return m_; }
    const WeightMap& a_weights() const { return a_; }
    const Rat& m_total() const { return m_total_; }
    std::size_t moves(Player p) const { return p == Player::M ? m_moves_ : a_moves_; }

    /// Order-independent digest of (m, a); changes with every stored value.
    std::uint64_t digest() const { return digest_; }

    bool in_tree(const NodeId& x) const { return x.depth() <= config_.height; }
    bool is_leaf(const NodeId& x) const { return x.depth() == config_.height; }

    /// Validates `delta` against the post-move position without modifying state.
    std::optional<MoveError> check(const MoveDelta& delta) const {
        WeightMap post;
        return stage(delta, post);
    }

    /// Applies `delta` if legal; otherwise leaves the state untouched.
    std::optional<MoveError> try_apply(const MoveDelta& delta) {
        WeightMap post;
        if (auto err = stage(delta, post)) return err;
        WeightMap& store = delta.player == Player::M ? m_ : a_;
        for (auto& [node, value] : post) {
            const Rat& old = lookup(store, node);
            if (old == value) continue;
            if (delta.player == Player::M) m_total_ += value - old;
            digest_ ^= entry_hash(delta.player, node, old);
            digest_ ^= entry_hash(delta.player, node, value);
            if (sgn(value) == 0)
                store.erase(node);
            else
                store[node] = value;
        }
        if (!delta.is_pass()) ++(delta.player == Player::M ? m_moves_ : a_moves_);
        return std::nullopt;
    }

    void apply(const MoveDelta& delta) {
        if (auto err = try_apply(delta)) throw IllegalMove(*err);
    }

    /// Raises the declared height (layered games grow on demand).
    void extend_height(std::size_t height) {
        if (height < config_.height) throw std::invalid_argument("height can only grow");
        config_.height = height;
    }

private:
    static const Rat& lookup(const WeightMap& map, const NodeId& x) {
        static const Rat zero{0};
        auto it = map.find(x);
        return it == map.end() ? zero : it->second;
    }

    static std::uint64_t entry_hash(Player p, const NodeId& x, const Rat& v) {
        if (sgn(v) == 0) return 0;
        const char tag = p == Player::M ? 'm' : 'a';
        return hash_rat(v, x.hash(fnv1a(&tag, 1)));
    }

    std::optional<MoveError> stage(const MoveDelta& delta, WeightMap& post) const {
        const WeightMap& store = delta.player == Player::M ? m_ : a_;
        auto current = [&](const NodeId& x) -> const Rat& {
            auto it = post.find(x);
            return it != post.end() ? it->second : lookup(store, x);
        };
        Rat running = m_total_;
        std::optional<NodeId> over_budget;
        for (const auto& u : delta.updates) {
            if (!in_tree(u.node)) return MoveError{MoveErrorKind::OutOfTree, u.node};
            const Rat& old = current(u.node);
            if (u.value < old) return MoveError{MoveErrorKind::DecreaseRejected, u.node};
            if (delta.player == Player::A && u.node.is_root() && u.value != old)
                return MoveError{MoveErrorKind::RootFlowChanged, u.node};
            if (delta.player == Player::M) {
                running += u.value - old;
                if (!over_budget && running > config_.budget) over_budget = u.node;
            }
            post[u.node] = u.value;
        }
        if (delta.player == Player::M) {
            if (running > config_.budget) return MoveError{MoveErrorKind::BudgetExceeded, *over_budget};
            return std::nullopt;
        }
        // Flow constraints are re-checked on the post-move position at every
        // touched node and at its parent.
        auto flow_ok = [&](const NodeId& x) {
            if (is_leaf(x)) return true;
            return current(x) >= current(x.child(false)) + current(x.child(true));
        };
        std::optional<NodeId> worst;
        auto consider = [&](const NodeId& x) {
            if (flow_ok(x)) return;
            if (!worst || x.depth() < worst->depth() || (x.depth() == worst->depth() && x < *worst))
                worst = x;
        };
        for (const auto& [node, value] : post) {
            consider(node);
            if (!node.is_root()) consider(node.parent());
        }
        if (worst) return MoveError{MoveErrorKind::FlowViolation, *worst};
        return std::nullopt;
    }

    GameConfig config_;
    WeightMap m_;
    WeightMap a_;
    Rat m_total_{0};
    std::size_t m_moves_ = 0;
    std::size_t a_moves_ = 0;
    std::uint64_t digest_ = 0;
};

inline GameState make_state(const GameConfig& config) { return GameState(config); }

/// Value-semantic move application; throws IllegalMove.
inline GameState apply_move(GameState state, const MoveDelta& delta) {
    state.apply(delta);
    return state;
}

/// Sum of m(x)/a(x) over all x that are prefixes of `node` (node included).
inline ExtRat prefix_sum(const GameState& s, const NodeId& node) {
    ExtRat total;
    const auto& m = s.m_weights();
    if (m.size() < node.depth() + 1) {
        for (const auto& [x, w] : m)
            if (x.is_prefix_of(node)) total += ratio(w, s.a(x));
    } else {
        for (std::size_t d = 0; d <= node.depth(); ++d) {
            NodeId x = node.prefix(d);
            const Rat& w = s.m(x);
            if (sgn(w) != 0) total += ratio(w, s.a(x));
        }
    }
    return total;
}

/// Path sum to a leaf (a node at the configured height).
inline ExtRat path_sum(const GameState& s, const NodeId& leaf) {
    if (!s.is_leaf(leaf)) throw IllegalMove(MoveError{MoveErrorKind::OutOfTree, leaf});
    return prefix_sum(s, leaf);
}

struct LeafSum {
    NodeId leaf;
    ExtRat sum;
};

/// End of the heaviest chain of weighted vertices inside the subtree at
/// `root` (only vertices below or at `root` are counted). Ties go to the
/// leftmost chain end after zero padding.
struct ChainMax {
    std::optional<NodeId> node;
    ExtRat sum;
};

inline ChainMax max_chain(const GameState& s, const NodeId& root) {
    ChainMax best;
    std::vector<std::pair<const NodeId*, ExtRat>> stack;  // weighted ancestors, preorder
    const auto& m = s.m_weights();
    for (auto it = m.lower_bound(root); it != m.end() && root.is_prefix_of(it->first); ++it) {
        const NodeId& x = it->first;
        while (!stack.empty() && !stack.back().first->is_prefix_of(x)) stack.pop_back();
        ExtRat chain = stack.empty() ? ExtRat() : stack.back().second;
        chain += ratio(it->second, s.a(x));
        stack.emplace_back(&x, chain);
        if (!best.node || chain > best.sum ||
            (chain == best.sum && compare_zero_padded(x, *best.node) < 0)) {
            best.sum = chain;
            best.node = x;
        }
    }
    return best;
}

/// Leaf with maximal path sum; ties go to the leftmost leaf.
///
/// Only vertices with m > 0 contribute, so the maximum is attained at the end
/// of some chain of weighted vertices, extended by zeros to full depth. In an
/// unbounded game the chain end itself is returned.
inline LeafSum best_leaf(const GameState& s) {
    const std::size_t height = s.config().height;
    ChainMax best = max_chain(s, NodeId::root());
    if (!best.node) return {NodeId::repeat(false, s.config().unbounded() ? 0 : height), ExtRat()};
    return {s.config().unbounded() ? *best.node : best.node->padded(height), best.sum};
}

inline bool is_winning_for_M(const GameState& s) {
    return best_leaf(s).sum >= ExtRat(s.config().target);
}

/// Unused flow at a non-leaf vertex: a(x) - a(x0) - a(x1).
inline Rat flow_slack(const GameState& s, const NodeId& x) {
    if (!s.in_tree(x) || s.is_leaf(x)) throw IllegalMove(MoveError{MoveErrorKind::OutOfTree, x});
    return s.a(x) - s.a(x.child(false)) - s.a(x.child(true));
}

}  // namespace flowgame
