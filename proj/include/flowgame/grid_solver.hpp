#pragma once

#include "flowgame/adversaries.hpp"
#include "flowgame/match.hpp"
#include "flowgame/strategy.hpp"

#include <array>
#include <unordered_map>

namespace flowgame {

/// Exhaustive search of the strict game on a tiny tree with both players
/// restricted to multiples of 1/q (budget = root flow = 1). After each move
/// the mover must hold a winning position; a player with no such move loses.
/// If the ply cap runs out before A is stuck, A is credited with the win.
struct GridConfig {
    std::size_t height = 0;
    Rat k{1};
    unsigned q = 8;
    unsigned plies = 6;
    bool toy = false;  // M is fixed to the toy strategy (k taken as its target)
    std::size_t node_cap = 20'000'000;
};

struct GridResult {
    Player winner = Player::A;
    std::vector<MoveDelta> pv;  // principal variation
    std::size_t nodes = 0;
};

struct ResourceCapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class GridSolver {
public:
    static constexpr std::size_t kMaxNodes = 7;
    using Vec = std::array<std::uint8_t, kMaxNodes>;

    struct Pos {
        Vec m{};
        Vec a{};
    };

    explicit GridSolver(GridConfig c) : cfg_(std::move(c)) {
        if (cfg_.height > 2) throw std::invalid_argument("grid solver supports height <= 2");
        if (cfg_.q < 1 || cfg_.q > 8) throw std::invalid_argument("grain q must be in 1..8");
        if (cfg_.plies > 8) throw std::invalid_argument("at most 8 plies");
        if (cfg_.toy && (cfg_.height != 2 || cfg_.q % 4 != 0))
            throw std::invalid_argument("toy mode needs height 2 and q divisible by 4");
        nodes_ = (std::size_t{2} << cfg_.height) - 1;
        for (std::size_t i = 0; i < nodes_; ++i) ids_[i] = id_of(i);
        build_symmetries();
        k_num_ = BigInt(cfg_.k.get_num()).get_si();
        k_den_ = BigInt(cfg_.k.get_den()).get_si();
    }

    Pos initial() const {
        Pos p;
        p.a[0] = static_cast<std::uint8_t>(cfg_.q);
        return p;
    }

    GridResult solve() {
        GridResult r;
        Pos p = initial();
        r.winner = wins_m(p, cfg_.plies, true) ? Player::M : Player::A;
        r.pv = principal_variation(p);
        r.nodes = visited_;
        return r;
    }

    /// True iff some leaf has sum >= k.
    bool m_winning(const Pos& p) const {
        for (std::size_t leaf = first_leaf(); leaf < nodes_; ++leaf) {
            long long sum = 0;  // in units of 1/840
            for (std::size_t i = leaf;; i = (i - 1) / 2) {
                if (p.m[i] != 0) {
                    if (p.a[i] == 0) return true;
                    sum += 840LL * p.m[i] / p.a[i];
                }
                if (i == 0) break;
            }
            if (sum * k_den_ >= 840LL * k_num_) return true;
        }
        return false;
    }

    std::vector<Pos> m_moves(const Pos& p) const {
        std::vector<Pos> out;
        if (cfg_.toy) {
            if (auto next = toy_move(p)) out.push_back(*next);
            return out;
        }
        Pos cur = p;
        int spent = 0;
        for (std::size_t i = 0; i < nodes_; ++i) spent += p.m[i];
        enum_m(p, cur, 0, static_cast<int>(cfg_.q) - spent, out);
        return out;
    }

    std::vector<Pos> a_moves(const Pos& p) const {
        std::vector<Pos> out;
        Pos cur = p;
        enum_a(p, cur, 0, out);
        return out;
    }

    /// Moves that leave the mover winning.
    std::vector<Pos> restoring(const Pos& p, bool m_to_move) const {
        std::vector<Pos> out;
        for (auto& next : m_to_move ? m_moves(p) : a_moves(p))
            if (m_winning(next) == m_to_move) out.push_back(next);
        return out;
    }

    MoveDelta delta(const Pos& from, const Pos& to, Player who) const {
        MoveDelta d;
        d.player = who;
        const Vec& x = who == Player::M ? from.m : from.a;
        const Vec& y = who == Player::M ? to.m : to.a;
        for (std::size_t i = 0; i < nodes_; ++i)
            if (x[i] != y[i]) d.updates.push_back({ids_[i], make_rat(y[i], cfg_.q)});
        for (auto& u : d.updates) u.value.canonicalize();
        return d;
    }

    GameState to_state(const Pos& p) const {
        GameState s(GameConfig{cfg_.height, 1, 1, cfg_.k});
        MoveDelta dm = delta(initial(), p, Player::M), da = delta(initial(), p, Player::A);
        s.apply(dm);
        s.apply(da);
        return s;
    }

    bool wins_m(const Pos& p, unsigned plies, bool m_to_move) {
        if (plies == 0) return false;
        if (++visited_ > cfg_.node_cap) throw ResourceCapExceeded("grid solver node cap exceeded");
        const std::uint64_t key = canonical_key(p, plies, m_to_move);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        bool result;
        if (m_to_move) {
            result = false;
            for (const auto& next : restoring(p, true))
                if (wins_m(next, plies - 1, false)) {
                    result = true;
                    break;
                }
        } else {
            result = true;
            for (const auto& next : restoring(p, false))
                if (!wins_m(next, plies - 1, true)) {
                    result = false;
                    break;
                }
        }
        memo_.emplace(key, result);
        return result;
    }

    /// Every sequence of restoring A moves against the toy strategy, up to the
    /// ply cap; `m_won` is false for lines cut by the cap or where the toy
    /// failed to win.
    struct Line {
        std::vector<MoveDelta> a_moves;
        bool m_won = false;
    };

    std::vector<Line> toy_lines() const {
        if (!cfg_.toy) throw std::logic_error("toy_lines needs toy mode");
        std::vector<Line> out;
        Line cur;
        walk_lines(initial(), cfg_.plies, cur, out);
        return out;
    }

    std::size_t visited() const { return visited_; }

private:
    std::size_t first_leaf() const { return (std::size_t{1} << cfg_.height) - 1; }

    static NodeId id_of(std::size_t idx) {
        NodeId x;
        std::vector<bool> bits;
        while (idx > 0) {
            bits.push_back(idx % 2 == 0);  // right child has even index
            idx = (idx - 1) / 2;
        }
        for (auto it = bits.rbegin(); it != bits.rend(); ++it) x.push_back(*it);
        return x;
    }

    void enum_m(const Pos& base, Pos& cur, std::size_t i, int left, std::vector<Pos>& out) const {
        if (i == nodes_) {
            if (cur.m != base.m) out.push_back(cur);
            return;
        }
        for (int extra = 0; extra <= left; ++extra) {
            cur.m[i] = static_cast<std::uint8_t>(base.m[i] + extra);
            enum_m(base, cur, i + 1, left - extra, out);
        }
        cur.m[i] = base.m[i];
    }

    // top-down over internal vertices; children values chosen together
    void enum_a(const Pos& base, Pos& cur, std::size_t i, std::vector<Pos>& out) const {
        if (i >= first_leaf()) {
            if (cur.a != base.a) out.push_back(cur);
            return;
        }
        const std::size_t c0 = 2 * i + 1, c1 = 2 * i + 2;
        for (int v0 = base.a[c0]; v0 + base.a[c1] <= cur.a[i]; ++v0) {
            for (int v1 = base.a[c1]; v0 + v1 <= cur.a[i]; ++v1) {
                cur.a[c0] = static_cast<std::uint8_t>(v0);
                cur.a[c1] = static_cast<std::uint8_t>(v1);
                enum_a(base, cur, i + 1, out);
            }
        }
        cur.a[c0] = base.a[c0];
        cur.a[c1] = base.a[c1];
    }

    std::optional<Pos> toy_move(const Pos& p) const {
        GameState s = to_state(p);
        auto ups = toy_reply(GameView::top(s), cfg_.k);
        if (ups.empty()) return std::nullopt;
        Pos next = p;
        for (const auto& u : ups) {
            Rat units = u.value * cfg_.q;
            if (units.get_den() != 1) throw std::logic_error("toy move off the grid");
            for (std::size_t i = 0; i < nodes_; ++i)
                if (ids_[i] == u.node) next.m[i] = static_cast<std::uint8_t>(units.get_num().get_ui());
        }
        return next;
    }

    void build_symmetries() {
        // automorphisms: independently swap the children of each internal vertex
        const std::size_t internal = first_leaf();
        for (std::size_t mask = 0; mask < (std::size_t{1} << internal); ++mask) {
            std::array<std::size_t, kMaxNodes> perm{};
            for (std::size_t i = 0; i < nodes_; ++i) {
                NodeId x = ids_[i], y;
                for (std::size_t d = 0; d < x.depth(); ++d) {
                    // swap bit d if the ancestor at depth d has its flag set
                    std::size_t anc = index_of(x.prefix(d));
                    bool b = x.bit(d);
                    if ((mask >> anc) & 1U) b = !b;
                    y.push_back(b);
                }
                perm[i] = index_of(y);
            }
            syms_.push_back(perm);
        }
    }

    std::size_t index_of(const NodeId& x) const {
        std::size_t idx = 0;
        for (std::size_t d = 0; d < x.depth(); ++d) idx = 2 * idx + (x.bit(d) ? 2 : 1);
        return idx;
    }

    std::uint64_t pack(const Pos& p, const std::array<std::size_t, kMaxNodes>& perm) const {
        std::uint64_t key = 0;
        for (std::size_t i = 0; i < nodes_; ++i) key = (key << 4) | p.m[perm[i]];
        for (std::size_t i = 0; i < nodes_; ++i) key = (key << 4) | p.a[perm[i]];
        return key;
    }

    std::uint64_t canonical_key(const Pos& p, unsigned plies, bool m_to_move) const {
        std::uint64_t best = pack(p, syms_.front());
        if (!cfg_.toy)
            for (const auto& perm : syms_) best = std::min(best, pack(p, perm));
        return (best << 5) | (static_cast<std::uint64_t>(plies) << 1) | (m_to_move ? 1U : 0U);
    }

    std::vector<MoveDelta> principal_variation(Pos p) {
        std::vector<MoveDelta> pv;
        bool m_turn = true;
        for (unsigned plies = cfg_.plies; plies > 0; --plies, m_turn = !m_turn) {
            auto options = restoring(p, m_turn);
            if (options.empty()) break;
            const Pos* pick = &options.front();
            for (const auto& next : options) {
                bool mw = wins_m(next, plies - 1, !m_turn);
                if (mw == m_turn) {
                    pick = &next;
                    break;
                }
            }
            pv.push_back(delta(p, *pick, m_turn ? Player::M : Player::A));
            p = *pick;
        }
        return pv;
    }

    // mirrors wins_m: A is only credited as stuck if a ply is left for her
    void walk_lines(const Pos& p, unsigned plies, Line& cur, std::vector<Line>& out) const {
        auto mv = plies > 0 ? m_moves(p) : std::vector<Pos>{};
        if (mv.empty() || !m_winning(mv.front()) || plies < 2) {
            out.push_back({cur.a_moves, false});
            return;
        }
        const Pos after_m = mv.front();
        auto replies = restoring(after_m, false);
        if (replies.empty()) {
            out.push_back({cur.a_moves, true});
            return;
        }
        for (const auto& r : replies) {
            cur.a_moves.push_back(delta(after_m, r, Player::A));
            walk_lines(r, plies - 2, cur, out);
            cur.a_moves.pop_back();
        }
    }

    GridConfig cfg_;
    std::size_t nodes_ = 1;
    std::array<NodeId, kMaxNodes> ids_{};
    std::vector<std::array<std::size_t, kMaxNodes>> syms_;
    long k_num_ = 1, k_den_ = 1;
    std::unordered_map<std::uint64_t, bool> memo_;
    std::size_t visited_ = 0;
};

inline GridResult grid_solve(const GridConfig& cfg) { return GridSolver(cfg).solve(); }

/// Largest candidate k = 1 + j/32 (j = 0..32) at which the toy strategy beats
/// every grid adversary, with the full table of outcomes.
struct ToyGuarantee {
    bool found = false;
    Rat k_star{1};
    std::vector<std::pair<Rat, bool>> table;
    std::size_t lines_checked = 0;
    bool consistent = false;  // every A line at k* replays as an M win
    std::string inconsistency;
};

inline ToyGuarantee toy_guarantee(unsigned q = 8, unsigned plies = 6) {
    ToyGuarantee g;
    for (int j = 0; j <= 32; ++j) {
        Rat k = make_rat(32 + j, 32);
        GridConfig c{2, k, q, plies, true};
        bool wins = grid_solve(c).winner == Player::M;
        g.table.emplace_back(k, wins);
        if (wins) {
            g.found = true;
            g.k_star = k;
        }
    }
    if (!g.found) return g;
    // replay every A line at k* through the real referee
    GridSolver solver(GridConfig{2, g.k_star, q, plies, true});
    g.consistent = true;
    for (const auto& line : solver.toy_lines()) {
        ++g.lines_checked;
        if (!line.m_won) {
            g.consistent = false;
            g.inconsistency = "search line not won by the toy strategy";
            break;
        }
        auto m = toy_strategy(g.k_star);
        auto a = scripted(line.a_moves);
        MatchOptions opt;
        opt.caps.rounds = plies + 8;
        MatchTrace t = run_match(*m, *a, GameConfig{2, 1, 1, g.k_star}, opt);
        if (t.verdict.kind != VerdictKind::MWins) {
            g.consistent = false;
            g.inconsistency = "replayed line ends in " + std::string(verdict_name(t.verdict.kind)) + ": " +
                              t.verdict.reason;
            break;
        }
    }
    return g;
}

}  // namespace flowgame
