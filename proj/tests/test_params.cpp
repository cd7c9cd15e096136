#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "mfgbroker/params.hpp"

using namespace mfgb;

TEST_CASE("default parameters satisfy the standing assumptions") {
    const ValidationReport r = validate_params(ModelParams{});
    CHECK(r.ok());
    CHECK(r.first_failure().empty());
}

TEST_CASE("violations are reported by name, not thrown") {
    ModelParams p;
    p.eta_I = 0.0;
    const ValidationReport r = validate_params(p);
    CHECK_FALSE(r.ok());
    CHECK(r.first_failure() == "eta_I > 0");

    ModelParams q;
    q.b = 1.0;  // exceeds 2 eta_B, 2 eta_I, 4 phi_B, 4 phi_bar
    const ValidationReport r2 = validate_params(q);
    CHECK_FALSE(r2.ok());
    bool found = false;
    for (const auto& c : r2.checks)
        if (c.name == "b <= 2*eta_B") found = !c.pass;
    CHECK(found);
}

TEST_CASE("validation is pure") {
    ModelParams p;
    p.a_B = -1.0;
    const ValidationReport a = validate_params(p);
    const ValidationReport b = validate_params(p);
    REQUIRE(a.checks.size() == b.checks.size());
    for (std::size_t i = 0; i < a.checks.size(); ++i) {
        CHECK(a.checks[i].name == b.checks[i].name);
        CHECK(a.checks[i].pass == b.checks[i].pass);
    }
}

TEST_CASE("zero-volatility degenerate parameters are allowed") {
    ModelParams p;
    p.sigma_alpha = 0.0;
    p.sigma_S = 0.0;
    CHECK(validate_params(p).ok());
    TraderType t;
    t.sigma_I = 0.0;
    CHECK(t.valid());
}

TEST_CASE("time grid arithmetic") {
    const TimeGrid g(1.0, 10000);
    CHECK(g.steps() == 10000);
    CHECK(g.nodes() == 10001);
    CHECK(g.dt() == doctest::Approx(1e-4));
    CHECK(g.t(0) == 0.0);
    CHECK(g.t(10000) == doctest::Approx(1.0));
    CHECK_THROWS_AS(TimeGrid(1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(-1.0, 10), std::invalid_argument);
    CHECK(g == TimeGrid(1.0, 10000));
    CHECK_FALSE(g == TimeGrid(1.0, 5000));
}

TEST_CASE("point-mass type distribution returns the mean") {
    const TypeDistribution d(TypeDistribution::Kind::PointMass, TraderType{});
    CHECK(d.sample(1, 0) == TraderType{});
    CHECK(d.sample(7, 123) == TraderType{});
}

TEST_CASE("lognormal type distribution is deterministic and moment-matched") {
    const TraderType mean;
    const TypeDistribution d(TypeDistribution::Kind::Lognormal, mean, 0.25);
    CHECK(d.sample(1, 5) == d.sample(1, 5));
    CHECK_FALSE(d.sample(1, 5) == d.sample(1, 6));
    CHECK_FALSE(d.sample(1, 5) == d.sample(2, 5));

    const std::size_t n = 200000;
    double sum_a = 0.0, sum_k = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const TraderType t = d.sample(1, i);
        CHECK(t.valid());
        sum_a += t.a_I;
        sum_k += t.k_I;
    }
    // lognormal sd of each coordinate is ~0.25 m, so the mean of 2e5 draws
    // has se ~ 6e-4 m; 5 se band.
    CHECK(sum_a / double(n) == doctest::Approx(mean.a_I).epsilon(3e-3));
    CHECK(sum_k / double(n) == doctest::Approx(mean.k_I).epsilon(3e-3));
}

TEST_CASE("type distribution rejects invalid input") {
    TraderType bad;
    bad.a_I = -1.0;
    CHECK_THROWS_AS(
        TypeDistribution(TypeDistribution::Kind::PointMass, bad),
        std::invalid_argument);
    CHECK_THROWS_AS(
        TypeDistribution(TypeDistribution::Kind::Lognormal, TraderType{}, 0.0),
        std::invalid_argument);
}
