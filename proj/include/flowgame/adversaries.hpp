#pragma once

#include "flowgame/certificates.hpp"
#include "flowgame/strategy.hpp"

#include <random>

namespace flowgame {

class AStrategy : public Strategy {
public:
    Player player() const override { return Player::A; }
};

namespace detail {

/// Subtree masses of M's weights for every vertex on a path to a weighted
/// vertex under `root`.
inline WeightMap closure_masses(const GameState& s, const NodeId& root) {
    WeightMap mass;
    const auto& m = s.m_weights();
    for (auto it = m.lower_bound(root); it != m.end() && root.is_prefix_of(it->first); ++it) {
        const NodeId& x = it->first;
        for (std::size_t d = root.depth(); d <= x.depth(); ++d) mass[x.prefix(d)] += it->second;
    }
    return mass;
}

}  // namespace detail

/// Inside the subtree at `root`, raises flows toward the split of a(root)
/// proportional to M's current subtree masses. Increments are clipped
/// proportionally to the slack actually available and rounded down to
/// `bits` significant bits so denominators stay bounded.
inline void proportional_fill(FlowPlanner& plan, const NodeId& root, unsigned bits = 40) {
    const GameState& s = plan.state();
    WeightMap mass = detail::closure_masses(s, root);
    std::vector<NodeId> work;
    if (mass.count(root)) work.push_back(root);
    while (!work.empty()) {
        NodeId x = std::move(work.back());
        work.pop_back();
        if (!plan.has_children(x)) continue;
        NodeId c[2] = {x.child(false), x.child(true)};
        Rat mc[2];
        for (int b = 0; b < 2; ++b) {
            auto it = mass.find(c[b]);
            mc[b] = it == mass.end() ? Rat(0) : it->second;
        }
        const Rat total = mc[0] + mc[1];
        if (sgn(total) == 0) continue;
        const Rat ax = plan.a(x);
        Rat inc[2];
        for (int b = 0; b < 2; ++b) {
            Rat target = ax * mc[b] / total;
            Rat old = plan.a(c[b]);
            inc[b] = target > old ? Rat(target - old) : Rat(0);
        }
        const Rat avail = ax - plan.a(c[0]) - plan.a(c[1]);
        const Rat want = inc[0] + inc[1];
        for (int b = 0; b < 2; ++b) {
            Rat t = want > avail ? Rat(inc[b] * avail / want) : inc[b];
            t = floor_significant(t, bits);
            if (sgn(t) > 0) plan.set(c[b], plan.a(c[b]) + t);
            if (sgn(mc[b]) > 0) work.push_back(c[b]);
        }
    }
}

/// Pours all available flow into M's weighted vertices, in preorder.
class GreedyAll : public AStrategy {
public:
    std::string id() const override { return "greedy_all"; }

protected:
    std::vector<Update> play(const GameView& view) override {
        FlowPlanner plan(view.state());
        for (const auto& [x, w] : view.state().m_weights()) {
            if (x.is_root()) continue;
            plan.pour(x, plan.max_pour(x));
        }
        return plan.updates();
    }
};

/// Online version of the proportional-split measure: each turn, move the
/// flows toward the split proportional to M's current weights.
class ProportionalOnline : public AStrategy {
public:
    explicit ProportionalOnline(unsigned bits = 40) : bits_(bits) {}
    std::string id() const override { return "proportional_online"; }

protected:
    std::vector<Update> play(const GameView& view) override {
        FlowPlanner plan(view.state());
        proportional_fill(plan, NodeId::root(), bits_);
        return plan.updates();
    }

private:
    unsigned bits_;
};

/// Knows the top-level certificate. Keeps a(0) strictly below the live
/// threat threshold and, whenever that still allows it, funds the current
/// subtree z_i exactly to its quota so that M has to move on; otherwise fills
/// z_i as far as the cap allows. Inside z_i it plays proportionally.
class ThresholdDodger : public AStrategy {
public:
    ThresholdDodger(CertPtr cert, Rat delta) : cert_(std::move(cert)), delta_(std::move(delta)) {
        if (!cert_ || cert_->is_base()) throw std::invalid_argument("dodger needs a non-base cert");
        if (sgn(delta_) <= 0) throw std::invalid_argument("delta must be positive");
    }

    /// 1/1000 of the smallest gap between consecutive thresholds.
    static Rat default_delta(const StrategyCert& c) {
        Rat gap = c.d.front();
        for (std::size_t i = 1; i < c.d.size(); ++i) gap = std::min(gap, Rat(c.d[i] - c.d[i - 1]));
        return Rat(gap / 1000);
    }

    std::string id() const override { return "threshold_dodger(" + format_rat(delta_) + ")"; }

    /// Address of z_i in the plain layout.
    static NodeId z(long i) {
        NodeId x = NodeId::parse("0");
        x.append_run(true, static_cast<std::size_t>(i - 1));
        x.push_back(false);
        return x;
    }

protected:
    std::vector<Update> play(const GameView& view) override {
        const GameState& s = view.state();
        const Rat& R = s.config().root_flow;
        FlowPlanner plan(s);
        const NodeId v0 = NodeId::parse("0");
        const long n = cert_->n;
        while (i_ <= n) {
            const NodeId zi = z(i_);
            if (zi.depth() > s.config().height) break;  // tree too short for the cert
            const Rat quota = cert_->aq[static_cast<std::size_t>(i_ - 1)] * R;
            Rat need = quota - plan.a(zi);
            if (sgn(need) <= 0) {
                ++i_;
                continue;
            }
            Rat cap = i_ < n ? Rat((cert_->d[static_cast<std::size_t>(i_ - 1)] - delta_) * R) : R;
            Rat top = std::min(Rat(cap - plan.a(v0)), plan.slack(NodeId::root()));
            if (sgn(top) < 0) top = 0;
            Rat avail = top;
            for (std::size_t d = 1; d < zi.depth(); ++d) avail += plan.slack(zi.prefix(d));
            if (avail >= need) {
                plan.pour(zi, need);
                proportional_fill(plan, zi);
                ++i_;
                break;
            }
            if (sgn(avail) > 0) plan.pour(zi, avail);
            proportional_fill(plan, zi);
            break;
        }
        return plan.updates();
    }

private:
    CertPtr cert_;
    Rat delta_;
    long i_ = 1;
};

/// Random pours, biased toward M's weighted vertices; sometimes passes.
class RandomAdversary : public AStrategy {
public:
    RandomAdversary(std::uint64_t seed, unsigned grain) : rng_(seed), seed_(seed), grain_(std::max(grain, 1U)) {}

    std::string id() const override {
        return "random(" + std::to_string(seed_) + "," + std::to_string(grain_) + ")";
    }

protected:
    std::vector<Update> play(const GameView& view) override {
        const GameState& s = view.state();
        FlowPlanner plan(s);
        std::bernoulli_distribution pass(0.2), biased(0.75), coin(0.5);
        if (pass(rng_)) return {};
        std::vector<const NodeId*> support;
        std::size_t deepest = 0;
        for (const auto& [x, w] : s.m_weights()) {
            support.push_back(&x);
            deepest = std::max(deepest, x.depth());
        }
        const std::size_t max_depth = s.config().unbounded() ? deepest + 1 : std::min(s.config().height, deepest + 1);
        std::uniform_int_distribution<int> pours(1, 3);
        std::uniform_int_distribution<unsigned> part(1, grain_);
        for (int p = pours(rng_); p > 0; --p) {
            NodeId x;
            if (!support.empty() && biased(rng_)) {
                x = *support[std::uniform_int_distribution<std::size_t>(0, support.size() - 1)(rng_)];
                if (coin(rng_) && x.depth() > 1)
                    x = x.prefix(std::uniform_int_distribution<std::size_t>(1, x.depth())(rng_));
            } else {
                for (std::size_t d = std::uniform_int_distribution<std::size_t>(1, std::max<std::size_t>(max_depth, 1))(rng_);
                     d > 0; --d)
                    x.push_back(coin(rng_));
            }
            if (x.is_root() || !s.in_tree(x)) continue;
            Rat amount = floor_significant(Rat(plan.max_pour(x) * part(rng_) / grain_), 30);
            plan.pour(x, amount);
        }
        return plan.updates();
    }

private:
    std::mt19937_64 rng_;
    std::uint64_t seed_;
    unsigned grain_;
};

/// a(x) = root_flow * 2^-|x|, written out on the paths M has touched.
class UniformOnce : public AStrategy {
public:
    std::string id() const override { return "uniform_once"; }

protected:
    std::vector<Update> play(const GameView& view) override {
        const GameState& s = view.state();
        FlowPlanner plan(s);
        for (const auto& [x, w] : s.m_weights()) {
            for (std::size_t d = 1; d <= x.depth(); ++d) {
                NodeId y = x.prefix(d);
                Rat target = s.config().root_flow * pow2(-static_cast<long>(d));
                if (plan.a(y) < target) plan.raise_to(y, target);
            }
        }
        return plan.updates();
    }
};

/// Never moves.
class SilentAdversary : public AStrategy {
public:
    std::string id() const override { return "silent"; }

protected:
    std::vector<Update> play(const GameView&) override { return {}; }
};

/// Replays a fixed list of A moves, then passes.
class ScriptedAdversary : public AStrategy {
public:
    explicit ScriptedAdversary(std::vector<MoveDelta> moves) : moves_(std::move(moves)) {}
    std::string id() const override { return "scripted"; }

protected:
    std::vector<Update> play(const GameView&) override {
        if (next_ >= moves_.size()) return {};
        return moves_[next_++].updates;
    }

private:
    std::vector<MoveDelta> moves_;
    std::size_t next_ = 0;
};

inline StrategyPtr greedy_all() { return std::make_unique<GreedyAll>(); }
inline StrategyPtr proportional_online() { return std::make_unique<ProportionalOnline>(); }
inline StrategyPtr threshold_dodger(CertPtr cert, Rat delta) {
    return std::make_unique<ThresholdDodger>(std::move(cert), std::move(delta));
}
inline StrategyPtr random_adversary(std::uint64_t seed, unsigned grain) {
    return std::make_unique<RandomAdversary>(seed, grain);
}
inline StrategyPtr uniform_once() { return std::make_unique<UniformOnce>(); }
inline StrategyPtr silent() { return std::make_unique<SilentAdversary>(); }
inline StrategyPtr scripted(std::vector<MoveDelta> moves) { return std::make_unique<ScriptedAdversary>(std::move(moves)); }

}  // namespace flowgame
