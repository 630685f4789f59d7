#pragma once

#include "flowgame/rational.hpp"

#include <json.hpp>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowgame {

struct SearchCapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_domain(const Rat& k, const Rat& eps) {
    if (k < 1) throw std::domain_error("k must be >= 1");
    if (sgn(eps) <= 0 || eps >= 1) throw std::domain_error("eps must lie in (0, 1)");
}

inline void check_index(long n, long i) {
    if (n < 1 || i < 1 || i > n) throw std::domain_error("index i must satisfy 1 <= i <= n");
}

/// sum_{i=lo}^{hi} 1/(base + i*step), split in halves so operands stay balanced.
inline Rat sum_reciprocals(const BigInt& base, const BigInt& step, long lo, long hi) {
    if (lo > hi) return Rat(0);
    if (lo == hi) {
        Rat r(BigInt(1), base + step * lo);
        r.canonicalize();
        return r;
    }
    long mid = lo + (hi - lo) / 2;
    return Rat(sum_reciprocals(base, step, lo, mid) + sum_reciprocals(base, step, mid + 1, hi));
}

}  // namespace detail

/// d_i = 1 - k(1-eps)(1-i/n)/(k+eps).
inline Rat threshold_d(const Rat& k, const Rat& eps, long n, long i) {
    detail::check_domain(k, eps);
    detail::check_index(n, i);
    const Rat frac = make_rat(i, n);
    return Rat(1 - k * (1 - eps) * (1 - frac) / (k + eps));
}

/// a_i = k(1-eps)d_i / (n(d_i(k+eps) - eps)).
inline Rat subtree_quota_a(const Rat& k, const Rat& eps, long n, long i) {
    Rat d = threshold_d(k, eps, n, i);
    return Rat(k * (1 - eps) * d / (n * (d * (k + eps) - eps)));
}

inline double d_of_u(double k, double eps, double u) { return 1.0 - k * (1.0 - eps) * (1.0 - u) / (k + eps); }

inline double integrand(double k, double eps, double u) {
    const double d = d_of_u(k, eps, u);
    return k * (1.0 - eps) * d / ((k + eps) * d - eps);
}

/// Closed form of the integral of `integrand` over [0, 1] (natural log).
inline double integral_I(double k, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("eps must lie in (0, 1)");
    return (k * (1.0 - eps) + eps * std::log(1.0 / eps)) / (k + eps);
}

/// Exact right-endpoint Riemann sum sum_i a_i.
///
/// With v_i = eps + (i/n)(1-eps) the summand n*a_i equals
/// (1-eps)(k + eps/v_i)/(k+eps), so only sum 1/v_i needs real work.
inline Rat riemann_S(const Rat& k, const Rat& eps, long n) {
    detail::check_domain(k, eps);
    if (n < 1) throw std::domain_error("n must be positive");
    // 1/v_i = n q / (n p + i (q - p)) for eps = p/q
    const BigInt& p = eps.get_num();
    const BigInt& q = eps.get_den();
    Rat recips = detail::sum_reciprocals(BigInt(p * n), BigInt(q - p), 1, n);
    Rat sum_inv_v = recips * Rat(BigInt(q * n));
    return Rat((1 - eps) * (k + eps * sum_inv_v / n) / (k + eps));
}

/// Largest eps = 2^-j (j >= 2) with I(k, eps) > 1 + 2^-(j+3).
inline Rat choose_eps(const Rat& k, long min_j = 2) {
    if (k < 1) throw std::domain_error("k must be >= 1");
    const double kd = to_double(k);
    for (long j = std::max<long>(2, min_j); j <= 200; ++j) {
        const double eps = std::ldexp(1.0, static_cast<int>(-j));
        if (integral_I(kd, eps) > 1.0 + std::ldexp(1.0, static_cast<int>(-j - 3))) return pow2(-j);
    }
    throw SearchCapExceeded("no eps found for k = " + format_rat(k));
}

/// Minimal n with riemann_S(k, eps, n) > 1: doubling, then bisection.
inline long choose_n(const Rat& k, const Rat& eps, long cap = 1L << 14) {
    long hi = 1;
    while (riemann_S(k, eps, hi) <= 1) {
        if (hi >= cap) throw SearchCapExceeded("riemann sum stays <= 1 up to n = " + std::to_string(cap));
        hi = std::min(hi * 2, cap);
    }
    long lo = hi / 2;  // fails (or 0)
    while (hi - lo > 1) {
        long mid = lo + (hi - lo) / 2;
        if (riemann_S(k, eps, mid) > 1)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

/// Parameters of one level of the recursive strategy. The level wins the
/// game with target k + eps using the child level (target k) as a subroutine.
struct StrategyCert {
    Rat k{1};
    Rat eps{0};
    long n = 0;
    std::vector<Rat> d;
    std::vector<Rat> aq;
    Rat S{0};
    std::size_t height = 0;
    BigInt steps{1};
    BigInt monotone_height{0};
    std::shared_ptr<const StrategyCert> child;
    std::string hash;  // content hash of the canonical JSON, set on construction

    bool is_base() const { return n == 0; }
    Rat target() const { return Rat(k + eps); }
};

using CertPtr = std::shared_ptr<const StrategyCert>;

inline nlohmann::json cert_to_json(const StrategyCert& c);

inline std::string compute_cert_hash(const StrategyCert& c) {
    std::string canon = cert_to_json(c).dump();
    return hex64(fnv1a(canon.data(), canon.size()));
}

inline std::shared_ptr<StrategyCert> seal(std::shared_ptr<StrategyCert> c) {
    c->hash = compute_cert_hash(*c);
    return c;
}

inline CertPtr base_cert() { return seal(std::make_shared<StrategyCert>()); }

inline CertPtr build_cert(const CertPtr& child, long n_cap = 1L << 14) {
    if (!child) throw std::invalid_argument("build_cert needs a child");
    const Rat k = child->target();
    // floats pick eps; the exact S > 1 test has the last word
    long j = 2;
    while (true) {
        Rat eps = choose_eps(k, j);
        j = static_cast<long>(mpz_sizeinbase(eps.get_den_mpz_t(), 2)) - 1;
        long n;
        try {
            n = choose_n(k, eps, n_cap);
        } catch (const SearchCapExceeded&) {
            ++j;
            continue;
        }
        auto c = std::make_shared<StrategyCert>();
        c->k = k;
        c->eps = eps;
        c->n = n;
        for (long i = 1; i <= n; ++i) {
            c->d.push_back(threshold_d(k, eps, n, i));
            c->aq.push_back(subtree_quota_a(k, eps, n, i));
        }
        c->S = riemann_S(k, eps, n);
        c->height = static_cast<std::size_t>(n) + 1 + child->height;
        c->steps = 2 + (n + 1) * (child->steps + 1);
        const BigInt& nm = child->monotone_height;
        c->monotone_height = (n + 1) * (nm + 2) + nm + 2;
        c->child = child;
        return seal(c);
    }
}

/// Exact checks of every invariant; returns human-readable failures. With
/// `recursive` the whole child chain is checked too.
inline std::vector<std::string> validate_cert(const StrategyCert& c, bool recursive = true) {
    std::vector<std::string> bad;
    auto fail = [&](std::string s) { bad.push_back(std::move(s)); };
    if (c.is_base()) {
        if (c.k != 1 || sgn(c.eps) != 0 || c.height != 0 || c.steps != 1 || !c.d.empty() || !c.aq.empty() ||
            c.child || c.monotone_height != 0)
            fail("base certificate is not (k=1, N=0, steps=1)");
        return bad;
    }
    if (!c.child) {
        fail("missing child certificate");
        return bad;
    }
    if (c.k < 1) fail("k < 1");
    if (sgn(c.eps) <= 0 || c.eps >= 1) fail("eps outside (0, 1)");
    if (!bad.empty()) return bad;
    if (c.k != c.child->target()) fail("k differs from the child's target");
    if (c.n < 1 || c.d.size() != static_cast<std::size_t>(c.n) || c.aq.size() != static_cast<std::size_t>(c.n)) {
        fail("threshold/quota lists do not have n entries");
        return bad;
    }
    const Rat& k = c.k;
    const Rat& eps = c.eps;
    const Rat lower = eps * (1 + k) / (k + eps);
    Rat sum{0};
    for (long i = 1; i <= c.n; ++i) {
        const Rat& d = c.d[static_cast<std::size_t>(i - 1)];
        const Rat& a = c.aq[static_cast<std::size_t>(i - 1)];
        const std::string at = " at i=" + std::to_string(i);
        if (!(d > lower && d <= 1)) fail("d out of range" + at);
        if (i > 1 && !(d > c.d[static_cast<std::size_t>(i - 2)])) fail("d not increasing" + at);
        if (sgn(a) <= 0) fail("quota not positive" + at);
        if (d != threshold_d(k, eps, c.n, i)) fail("threshold differs from its defining equation" + at);
        if (a != subtree_quota_a(k, eps, c.n, i)) fail("quota differs from its defining equation" + at);
        if (i < c.n) {
            const Rat frac = make_rat(i, c.n);
            if (k * (1 - eps) * (1 - frac) / (1 - d) != k + eps) fail("threat identity" + at);
        }
        if (sgn(d) > 0 && k + eps - eps / d != k * ((1 - eps) / c.n) / a) fail("quota identity" + at);
        sum += a;
    }
    if (c.d.back() != 1) fail("d_n != 1");
    if (c.aq.back() != (1 - eps) / c.n) fail("a_n != (1-eps)/n");
    if (sum != c.S) fail("S differs from the sum of quotas");
    if (c.S != riemann_S(k, eps, c.n)) fail("S differs from the closed-form sum");
    if (!(c.S > 1)) fail("S <= 1");
    if (c.height != static_cast<std::size_t>(c.n) + 1 + c.child->height) fail("height recurrence");
    if (c.steps != 2 + (c.n + 1) * (c.child->steps + 1)) fail("step bound recurrence");
    const BigInt& nm = c.child->monotone_height;
    if (c.monotone_height != (c.n + 1) * (nm + 2) + nm + 2) fail("monotone height recurrence");
    if (c.hash != compute_cert_hash(c)) fail("stale content hash");
    if (recursive)
        for (auto& s : validate_cert(*c.child)) fail("child: " + s);
    return bad;
}

/// Rungs k_1 = 1 < k_2 < ... with k_last >= k_target; rung j+1 is built on rung j.
inline std::vector<CertPtr> ladder(const Rat& k_target, std::size_t max_rungs = 4096) {
    if (k_target < 1) throw std::domain_error("k target must be >= 1");
    std::vector<CertPtr> rungs{base_cert()};
    while (rungs.back()->target() < k_target) {
        if (rungs.size() >= max_rungs) throw SearchCapExceeded("ladder rung cap reached");
        rungs.push_back(build_cert(rungs.back()));
    }
    return rungs;
}

// ---- serialization ---------------------------------------------------------

inline const std::string& cert_hash(const StrategyCert& c) { return c.hash; }

inline nlohmann::json cert_to_json(const StrategyCert& c) {
    nlohmann::json j;
    j["format"] = 1;
    j["k"] = format_rat(c.k);
    j["eps"] = format_rat(c.eps);
    j["target"] = format_rat(c.target());
    j["n"] = c.n;
    j["d"] = nlohmann::json::array();
    j["aq"] = nlohmann::json::array();
    for (const auto& v : c.d) j["d"].push_back(format_rat(v));
    for (const auto& v : c.aq) j["aq"].push_back(format_rat(v));
    j["S"] = format_rat(c.S);
    j["height"] = c.height;
    j["steps"] = c.steps.get_str();
    j["monotone_height"] = c.monotone_height.get_str();
    j["child"] = c.child ? nlohmann::json(cert_hash(*c.child)) : nlohmann::json(nullptr);
    return j;
}

/// Parses one cert, linking it to `child`; every stored value is re-derived
/// and compared exactly.
inline CertPtr cert_from_json(const nlohmann::json& j, const CertPtr& child) {
    if (j.at("format").get<int>() != 1) throw std::invalid_argument("unsupported cert format");
    auto c = std::make_shared<StrategyCert>();
    c->k = parse_rat(j.at("k").get<std::string>());
    c->eps = parse_rat(j.at("eps").get<std::string>());
    c->n = j.at("n").get<long>();
    for (const auto& v : j.at("d")) c->d.push_back(parse_rat(v.get<std::string>()));
    for (const auto& v : j.at("aq")) c->aq.push_back(parse_rat(v.get<std::string>()));
    c->S = parse_rat(j.at("S").get<std::string>());
    c->height = j.at("height").get<std::size_t>();
    c->steps = BigInt(j.at("steps").get<std::string>());
    c->monotone_height = BigInt(j.at("monotone_height").get<std::string>());
    const auto& ch = j.at("child");
    if (ch.is_null() != !child) throw std::invalid_argument("cert child link mismatch");
    if (child && ch.get<std::string>() != cert_hash(*child))
        throw std::invalid_argument("cert child hash mismatch");
    c->child = child;
    seal(c);
    if (j.contains("target") && parse_rat(j.at("target").get<std::string>()) != c->target())
        throw std::invalid_argument("cert target mismatch");
    auto bad = validate_cert(*c, false);
    if (!bad.empty()) throw std::invalid_argument("invalid certificate: " + bad.front());
    return c;
}

inline nlohmann::json ladder_to_json(const std::vector<CertPtr>& rungs, const Rat& k_target) {
    nlohmann::json j;
    j["format"] = 1;
    j["k_target"] = format_rat(k_target);
    j["rungs"] = nlohmann::json::array();
    for (const auto& r : rungs) j["rungs"].push_back(cert_to_json(*r));
    return j;
}

inline std::vector<CertPtr> ladder_from_json(const nlohmann::json& j) {
    if (j.at("format").get<int>() != 1) throw std::invalid_argument("unsupported ladder format");
    std::vector<CertPtr> rungs;
    for (const auto& r : j.at("rungs")) {
        CertPtr prev = rungs.empty() ? nullptr : rungs.back();
        rungs.push_back(cert_from_json(r, prev));
    }
    if (rungs.empty() || !rungs.front()->is_base()) throw std::invalid_argument("ladder must start at the base rung");
    return rungs;
}

}  // namespace flowgame
