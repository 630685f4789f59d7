#pragma once

#include "flowgame/node_id.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <vector>

namespace flowgame {

/// Infinite 0/1 sequence with finitely many 1s, stored as its 1-positions.
struct MarkedBranch {
    std::set<std::size_t> ones;

    void add(const NodeId& path) {
        for (std::size_t p : path.ones()) ones.insert(p);
    }

    /// Bits 0..watermark as a string ("" for the all-zero branch).
    std::string str() const {
        if (ones.empty()) return {};
        std::string s(*ones.rbegin() + 1, '0');
        for (std::size_t p : ones) s[p] = '1';
        return s;
    }

    friend bool operator==(const MarkedBranch&, const MarkedBranch&) = default;
};

/// True iff every 1 of `b1` is also a 1 of `b2`.
inline bool dominates(const MarkedBranch& b1, const MarkedBranch& b2) {
    return std::includes(b2.ones.begin(), b2.ones.end(), b1.ones.begin(), b1.ones.end());
}

/// Coordinate-wise order of zero-padded paths: ones(x) within ones(y).
inline bool dominates(const NodeId& x, const NodeId& y) {
    auto a = x.ones(), b = y.ones();
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

/// Largest 1-position, or -1 for the all-zero branch.
inline long long watermark(const MarkedBranch& b) {
    return b.ones.empty() ? -1 : static_cast<long long>(*b.ones.rbegin());
}

/// Marked vertex of one finite game and its history.
struct MarkRecord {
    std::vector<NodeId> history;

    /// Records `x`; returns true if the mark changed.
    bool mark(const NodeId& x) {
        if (!history.empty() && history.back() == x) return false;
        history.push_back(x);
        return true;
    }

    std::optional<NodeId> current() const {
        if (history.empty()) return std::nullopt;
        return history.back();
    }

    std::size_t changes() const { return history.empty() ? 0 : history.size() - 1; }

    /// Index of the first mark that fails to dominate its predecessor.
    std::optional<std::size_t> first_break() const {
        for (std::size_t i = 1; i < history.size(); ++i)
            if (!dominates(history[i - 1], history[i])) return i;
        return std::nullopt;
    }

    bool is_chain() const { return !first_break(); }
};

enum class RootKind { Left, Threat, LayerRestart };

struct Placement {
    std::size_t base_depth = 0;  // depth of the enclosing game's root
    long long prev_run = -1;     // Left: run of the previous left root in this game
    NodeId marked;               // LayerRestart: new marked vertex (global)
};

/// Root of the next subgame so that its path carries a 1 at every published
/// position below it. Left and Threat roots are local to the game rooted at
/// depth `base_depth`; LayerRestart roots are global.
inline NodeId place_subgame_root(RootKind kind, const MarkedBranch& current, const Placement& p = {}) {
    long long w = watermark(current);
    const long long local = w - static_cast<long long>(p.base_depth);
    const long long wl = local < 0 ? -1 : local;
    switch (kind) {
        case RootKind::Left: {
            // distinct from the previous left root even when nothing new was published
            const long long run = std::max({wl, p.prev_run + 1, 0LL});
            NodeId x = NodeId::parse("0");
            x.append_run(true, static_cast<std::size_t>(run));
            x.push_back(false);
            return x;
        }
        case RootKind::Threat:
            return NodeId::repeat(true, static_cast<std::size_t>(wl + 2));
        case RootKind::LayerRestart: {
            NodeId x = p.marked;
            const std::size_t depth = std::max<std::size_t>(x.depth() + 1, static_cast<std::size_t>(w + 1));
            x.append_run(true, depth - x.depth());
            return x;
        }
    }
    return {};
}

}  // namespace flowgame
