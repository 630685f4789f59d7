#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace flowgame;
using oracle::a_direct;
using oracle::d_direct;

namespace {
Rat R(const char* s) { return parse_rat(s); }
}  // namespace

TEST_CASE("threshold and quota examples", "[certificates]") {
    const Rat eps = R("1/20");
    CHECK(threshold_d(1, eps, 2, 1) == R("23/42"));
    CHECK(d_direct(1, eps, 2, 1) == R("23/42"));
    CHECK(subtree_quota_a(1, eps, 2, 1) == R("437/882"));
    CHECK(a_direct(1, eps, 2, R("23/42")) == R("437/882"));
    for (long n : {1L, 2L, 7L, 30L}) {
        CHECK(threshold_d(R("17/16"), eps, n, n) == 1);
        CHECK(subtree_quota_a(R("17/16"), eps, n, n) == (1 - eps) / n);
    }
    CHECK_THROWS(threshold_d(1, eps, 2, 0));
    CHECK_THROWS(threshold_d(1, eps, 2, 3));
    CHECK_THROWS(threshold_d(R("1/2"), eps, 2, 1));
    CHECK_THROWS(threshold_d(1, 0, 2, 1));
}

TEST_CASE("thresholds and quotas agree with independent forms", "[certificates][property]") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 200; ++t) {
        Rat k = make_rat(std::uniform_int_distribution<long>(16, 64)(rng), 16);
        Rat eps = pow2(-std::uniform_int_distribution<long>(2, 10)(rng));
        long n = std::uniform_int_distribution<long>(1, 40)(rng);
        Rat lower = eps * (1 + k) / (k + eps);
        Rat prev = 0;
        for (long i = 1; i <= n; ++i) {
            Rat d = threshold_d(k, eps, n, i);
            REQUIRE(d == d_direct(k, eps, n, i));
            REQUIRE(d > lower);
            REQUIRE(d > prev);
            prev = d;
            Rat a = subtree_quota_a(k, eps, n, i);
            REQUIRE(a == a_direct(k, eps, n, d));
            // n a_i against the real integrand
            const double u = static_cast<double>(i) / n;
            REQUIRE(std::abs(to_double(Rat(a * n)) - oracle::integrand_direct(to_double(k), to_double(eps), u)) <=
                    1e-12);
        }
    }
}

TEST_CASE("integrand endpoints and shape", "[certificates]") {
    for (double k : {1.0, 1.5, 3.0})
        for (double eps : {0.25, 0.05, 1.0 / 1024}) {
            CHECK(d_of_u(k, eps, 1.0) == Catch::Approx(1.0).margin(1e-15));
            CHECK(integrand(k, eps, 1.0) == Catch::Approx(1.0 - eps).margin(1e-15));
            for (int j = 0; j < 100; ++j) CHECK(integrand(k, eps, j / 100.0) > integrand(k, eps, (j + 1) / 100.0));
        }
}

TEST_CASE("closed-form integral", "[certificates]") {
    CHECK(integral_I(1, std::exp(-2.0)) == Catch::Approx(1.0).margin(1e-15));
    CHECK(integral_I(1, 0.05) == Catch::Approx(1.0474).margin(1e-4));
    for (double k : {1.0, 1.25, 1.5, 2.0})
        for (int j = 2; j <= 10; ++j) {
            const double eps = std::ldexp(1.0, -j);
            CHECK(std::abs(integral_I(k, eps) - oracle::quadrature_I(k, eps)) <= 1e-9);
        }
    CHECK_THROWS(integral_I(1, 0));
}

TEST_CASE("riemann sums", "[certificates]") {
    CHECK(riemann_S(1, R("1/20"), 1) == R("19/20"));
    std::mt19937_64 rng(8);
    for (int t = 0; t < 60; ++t) {
        Rat k = make_rat(std::uniform_int_distribution<long>(16, 48)(rng), 16);
        Rat eps = pow2(-std::uniform_int_distribution<long>(2, 8)(rng));
        long n = std::uniform_int_distribution<long>(1, 60)(rng);
        Rat sum = 0;
        for (long i = 1; i <= n; ++i) sum += a_direct(k, eps, n, d_direct(k, eps, n, i));
        REQUIRE(riemann_S(k, eps, n) == sum);
        const double kd = to_double(k), ed = to_double(eps);
        const double I = integral_I(kd, ed);
        REQUIRE(to_double(sum) <= I + 1e-9);
        const double bound = (oracle::integrand_direct(kd, ed, 0) - oracle::integrand_direct(kd, ed, 1)) / n;
        REQUIRE(I - to_double(sum) <= bound + 1e-12);
        REQUIRE(std::abs(static_cast<double>(oracle::riemann_direct(kd, ed, n)) - to_double(sum)) <= 1e-12);
    }
}

TEST_CASE("choose_eps and choose_n", "[certificates]") {
    Rat e1 = choose_eps(1);
    CHECK(e1 <= R("1/8"));
    CHECK(to_double(e1) < std::exp(-2.0));
    CHECK(integral_I(1, to_double(e1)) > 1);
    CHECK(choose_eps(2) < e1);
    CHECK_THROWS(choose_eps(R("1/2")));

    // regression constant
    const Rat eps = R("1/20");
    const long n = choose_n(1, eps);
    CHECK(n == 6);
    CHECK(riemann_S(1, eps, n) > 1);
    CHECK(riemann_S(1, eps, n - 1) <= 1);
    CHECK(oracle::riemann_direct(1.0L, 0.05L, n) > 1.0L);
    CHECK(oracle::riemann_direct(1.0L, 0.05L, n - 1) < 1.0L);

    CHECK_THROWS_AS(choose_n(1, R("1/2"), 64), SearchCapExceeded);
}

TEST_CASE("rung constants", "[certificates]") {
    auto base = base_cert();
    CHECK(base->is_base());
    CHECK(base->k == 1);
    CHECK(base->height == 0);
    CHECK(base->steps == 1);
    CHECK(validate_cert(*base).empty());

    auto r2 = build_cert(base);
    CHECK(r2->k == 1);
    CHECK(r2->eps == R("1/16"));
    CHECK(r2->n == 7);
    CHECK(r2->height == 8);
    CHECK(r2->steps == 18);
    CHECK(r2->target() == R("17/16"));
    CHECK(validate_cert(*r2).empty());

    auto r3 = build_cert(r2);
    CHECK(r3->k == R("17/16"));
    CHECK(r3->height == 16);
    CHECK(r3->steps == 154);
    CHECK(r3->monotone_height == 8 * (18 + 2) + 18 + 2);
    CHECK(validate_cert(*r3).empty());
}

TEST_CASE("ladders", "[certificates]") {
    CHECK(ladder(1).size() == 1);
    CHECK(ladder(R("17/16")).size() == 2);
    auto l = ladder(R("9/8"));
    REQUIRE(l.size() == 3);
    auto r4 = build_cert(l.back());
    CHECK(r4->k == R("9/8"));
    CHECK(r4->n == 8);
    CHECK(r4->height == 25);
    CHECK(r4->steps == 1397);
    for (std::size_t i = 1; i < l.size(); ++i) {
        CHECK(l[i]->target() > l[i - 1]->target());
        CHECK(l[i]->k == l[i - 1]->target());
        CHECK(l[i]->child == l[i - 1]);
    }
    CHECK_THROWS_AS(ladder(2, 3), SearchCapExceeded);
    CHECK_THROWS(ladder(R("1/2")));
}

TEST_CASE("certificate invariants hold along a longer ladder", "[certificates][property]") {
    auto l = ladder(2);
    CHECK(l.size() == 23);
    for (const auto& c : l) {
        REQUIRE(validate_cert(*c, false).empty());
        if (c->is_base()) continue;
        const Rat& k = c->k;
        const Rat& eps = c->eps;
        for (long i = 1; i < c->n; ++i) {
            const Rat& d = c->d[static_cast<std::size_t>(i - 1)];
            REQUIRE(k * (1 - eps) * (1 - make_rat(i, c->n)) / (1 - d) == k + eps);
        }
        for (long i = 1; i <= c->n; ++i) {
            const Rat& d = c->d[static_cast<std::size_t>(i - 1)];
            const Rat& a = c->aq[static_cast<std::size_t>(i - 1)];
            REQUIRE(k + eps - eps / d == k * ((1 - eps) / c->n) / a);
        }
        REQUIRE(c->S > 1);
    }
}

TEST_CASE("certificate JSON round trip and tamper detection", "[certificates]") {
    auto l = ladder(R("9/8"));
    const std::string text = ladder_to_json(l, R("9/8")).dump();
    auto back = ladder_from_json(nlohmann::json::parse(text));
    REQUIRE(back.size() == l.size());
    for (std::size_t i = 0; i < l.size(); ++i) CHECK(back[i]->hash == l[i]->hash);
    CHECK(ladder_to_json(back, R("9/8")).dump() == text);

    auto j = nlohmann::json::parse(text);
    j["rungs"][2]["aq"][0] = "1/3";
    CHECK_THROWS(ladder_from_json(j));
    j = nlohmann::json::parse(text);
    j["rungs"][2]["steps"] = "17";
    CHECK_THROWS(ladder_from_json(j));
    j = nlohmann::json::parse(text);
    j["rungs"][2]["child"] = "0000000000000000";
    CHECK_THROWS(ladder_from_json(j));
    j = nlohmann::json::parse(text);
    j["rungs"].erase(0);
    CHECK_THROWS(ladder_from_json(j));

    auto bad = std::make_shared<StrategyCert>(*l[2]);
    bad->d[0] += R("1/1000000");
    CHECK_FALSE(validate_cert(*bad).empty());
}
