#pragma once

#include "flowgame/game.hpp"

#include <json.hpp>

#include <random>

namespace flowgame {

/// Non-negative weights on the vertices of a height-N tree with total <= 1.
struct DiscreteSemimeasure {
    std::size_t height = 0;
    WeightMap weights;

    Rat total() const {
        Rat t{0};
        for (const auto& [x, w] : weights) t += w;
        return t;
    }

    void validate() const {
        for (const auto& [x, w] : weights) {
            if (x.depth() > height) throw std::invalid_argument("semimeasure node outside tree: " + x.str());
            if (sgn(w) < 0) throw std::invalid_argument("negative semimeasure weight at " + x.str());
        }
        if (total() > 1) throw std::invalid_argument("semimeasure total exceeds 1");
    }
};

/// M_z: total weight of z and everything below it.
inline Rat subtree_mass(const DiscreteSemimeasure& m, const NodeId& z) {
    Rat total{0};
    for (auto it = m.weights.lower_bound(z); it != m.weights.end() && z.is_prefix_of(it->first); ++it)
        total += it->second;
    return total;
}

/// Additive tree measure with value(root) = 1. Subtrees of zero mass are
/// stored only at their top vertex and split equally below it.
class TreeMeasure {
public:
    explicit TreeMeasure(std::size_t height) : height_(height) { values_[NodeId::root()] = 1; }

    std::size_t height() const { return height_; }

    Rat value(const NodeId& x) const {
        auto it = values_.find(x);
        if (it != values_.end()) return it->second;
        // nearest stored ancestor, then halve once per level
        for (std::size_t d = x.depth(); d-- > 0;) {
            auto anc = values_.find(x.prefix(d));
            if (anc != values_.end()) {
                Rat v = anc->second;
                mpq_div_2exp(v.get_mpq_t(), v.get_mpq_t(), static_cast<mp_bitcnt_t>(x.depth() - d));
                return v;
            }
        }
        return Rat(0);
    }

    void set(const NodeId& x, Rat v) { values_[x] = std::move(v); }
    const WeightMap& stored() const { return values_; }

private:
    std::size_t height_;
    WeightMap values_;
};

/// Splits flow at every vertex in proportion to the masses of the two child
/// subtrees; equal halves when both are zero.
inline TreeMeasure proportional_split(const DiscreteSemimeasure& m, std::size_t height) {
    TreeMeasure out(height);
    // children masses computed top-down over the vertices carrying mass
    std::vector<std::pair<NodeId, Rat>> work{{NodeId::root(), Rat(1)}};
    while (!work.empty()) {
        auto [x, ax] = std::move(work.back());
        work.pop_back();
        if (x.depth() >= height) continue;
        NodeId c0 = x.child(false), c1 = x.child(true);
        Rat m0 = subtree_mass(m, c0), m1 = subtree_mass(m, c1);
        Rat a0, a1;
        if (sgn(m0) + sgn(m1) == 0) {
            a0 = ax / 2;
            a1 = a0;
        } else {
            a0 = ax * m0 / (m0 + m1);
            a1 = ax - a0;
        }
        out.set(c0, a0);
        out.set(c1, a1);
        if (sgn(m0) > 0) work.emplace_back(c0, a0);
        if (sgn(m1) > 0) work.emplace_back(c1, a1);
    }
    return out;
}

/// max over leaves w of sum_{x prefix of w} m(x)/a(x).
inline ExtRat max_path_ratio_sum(const DiscreteSemimeasure& m, const TreeMeasure& a) {
    ExtRat best;
    std::vector<std::pair<const NodeId*, ExtRat>> stack;
    for (const auto& [x, w] : m.weights) {
        if (sgn(w) == 0) continue;
        while (!stack.empty() && !stack.back().first->is_prefix_of(x)) stack.pop_back();
        ExtRat chain = stack.empty() ? ExtRat() : stack.back().second;
        chain += ratio(w, a.value(x));
        stack.emplace_back(&x, chain);
        if (chain > best) best = chain;
    }
    return best;
}

/// Checks value(x) = value(x0) + value(x1) at every internal vertex.
inline bool is_additive(const TreeMeasure& a) {
    if (a.value(NodeId::root()) != 1) return false;
    for (const auto& [x, v] : a.stored()) {
        if (sgn(v) < 0) return false;
        if (x.depth() >= a.height()) continue;
        if (v != a.value(x.child(false)) + a.value(x.child(true))) return false;
    }
    return true;
}

/// M_{xb}/a(xb) = (M_{x0}+M_{x1})/a(x) for every child xb of positive mass.
/// Returns the first vertex where it fails.
inline std::optional<NodeId> proportion_identity_violation(const DiscreteSemimeasure& m,
                                                          const TreeMeasure& a) {
    for (const auto& [x, v] : a.stored()) {
        if (x.depth() >= a.height()) continue;
        Rat m0 = subtree_mass(m, x.child(false)), m1 = subtree_mass(m, x.child(true));
        if (sgn(m0) + sgn(m1) == 0) continue;
        ExtRat whole = ratio(Rat(m0 + m1), v);
        if (sgn(m0) > 0 && ratio(m0, a.value(x.child(false))) != whole) return x;
        if (sgn(m1) > 0 && ratio(m1, a.value(x.child(true))) != whole) return x;
    }
    return std::nullopt;
}

/// The measure as an adversary limit position of the finite game.
inline std::vector<Update> as_flow_updates(const TreeMeasure& a) {
    std::vector<Update> out;
    for (const auto& [x, v] : a.stored())
        if (!x.is_root() && sgn(v) > 0) out.push_back({x, v});
    return out;
}

inline nlohmann::json semimeasure_to_json(const DiscreteSemimeasure& m) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [x, w] : m.weights) arr.push_back({{"node", x.str()}, {"weight", format_rat(w)}});
    return arr;
}

/// Accepts the bare list form or {"format": 1, "height": H, "weights": [...]}.
inline DiscreteSemimeasure semimeasure_from_json(const nlohmann::json& j, std::size_t default_height = 0) {
    DiscreteSemimeasure m;
    const nlohmann::json* list = &j;
    m.height = default_height;
    if (j.is_object()) {
        if (j.contains("height")) m.height = j.at("height").get<std::size_t>();
        list = &j.at("weights");
    }
    if (!list->is_array()) throw std::invalid_argument("semimeasure must be a list of {node, weight}");
    std::size_t deepest = 0;
    for (const auto& e : *list) {
        NodeId x = NodeId::parse(e.at("node").get<std::string>());
        Rat w = parse_rat(e.at("weight").get<std::string>());
        deepest = std::max(deepest, x.depth());
        if (sgn(w) != 0) m.weights[x] += w;
    }
    if (!j.is_object() || !j.contains("height")) m.height = std::max(m.height, deepest);
    m.validate();
    return m;
}

/// Random sparse semimeasure: a random number of random vertices, integer
/// weights normalized so the total is a random value in (0, 1].
template <class Rng>
DiscreteSemimeasure random_semimeasure(Rng& rng, std::size_t height) {
    DiscreteSemimeasure m;
    m.height = height;
    const std::size_t nodes = (std::size_t{2} << height) - 1;
    std::uniform_int_distribution<std::size_t> count_dist(1, std::min<std::size_t>(nodes, 24));
    std::uniform_int_distribution<std::size_t> depth_dist(0, height);
    std::uniform_int_distribution<unsigned> weight_dist(1, 1000);
    std::bernoulli_distribution coin(0.5);
    const std::size_t count = count_dist(rng);
    std::vector<std::pair<NodeId, unsigned>> raw;
    unsigned sum = 0;
    for (std::size_t i = 0; i < count; ++i) {
        NodeId x;
        for (std::size_t d = depth_dist(rng); d > 0; --d) x.push_back(coin(rng));
        unsigned w = weight_dist(rng);
        raw.emplace_back(std::move(x), w);
        sum += w;
    }
    std::uniform_int_distribution<unsigned> scale_dist(1, 64);
    const Rat total = make_rat(scale_dist(rng), 64);  // target total in (0, 1]
    for (auto& [x, w] : raw) m.weights[x] += Rat(total * w / sum);
    return m;
}

}  // namespace flowgame
