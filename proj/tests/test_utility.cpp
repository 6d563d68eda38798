#include <doctest.h>

#include <cmath>

#include "retirement/utility.hpp"

using namespace retirement;

namespace {

// Central finite difference with a relative step.
template <class F>
double fd(const F& f, double x) {
    const double h = 1e-5 * std::max(1.0, std::abs(x));
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

} // namespace

TEST_CASE("consumption marginal utility matches finite differences") {
    UtilityParams p;
    for (HouseholdKind d : {HouseholdKind::single, HouseholdKind::couple}) {
        for (int age : {65, 72, 90}) {
            for (double c : {25'000.0, 60'000.0, 250'000.0}) {
                auto u = [&](double x) { return consumption_utility(x, d, age, 65, p); };
                const double gamma = p.risk_aversion(d);
                const double analytic =
                    std::pow((c - p.consumption_floor(d)) / p.scale(d), gamma - 1.0) /
                    (p.scale(d) * std::pow(p.health_decay, static_cast<double>(age - 65)));
                CHECK(fd(u, c) == doctest::Approx(analytic).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("bequest marginal utility matches finite differences and is bounded at zero") {
    UtilityParams p;
    auto b = [&](double w) { return bequest_utility(w, p); };
    const double gamma = p.risk_aversion_single;
    const double odds = p.bequest_altruism / (1.0 - p.bequest_altruism);
    for (double w : {0.0, 10'000.0, 400'000.0, 2'000'000.0}) {
        const double analytic = std::pow(odds, 1.0 - gamma) *
                                std::pow(odds * p.bequest_threshold + w, gamma - 1.0);
        CHECK(fd(b, std::max(w, 1.0)) ==
              doctest::Approx(std::pow(odds, 1.0 - gamma) *
                              std::pow(odds * p.bequest_threshold + std::max(w, 1.0), gamma - 1.0))
                  .epsilon(1e-6));
        CHECK(std::isfinite(analytic));
    }
    // Luxury form: marginal utility at zero wealth stays finite.
    CHECK(std::isfinite(bequest_utility(0.0, p)));
    CHECK(fd(b, 1.0) < std::pow(odds, 1.0 - gamma) *
                           std::pow(odds * p.bequest_threshold, gamma - 1.0) * 1.01);
    CHECK_THROWS_AS(bequest_utility(-1.0, p), std::domain_error);
}

TEST_CASE("housing marginal utility matches finite differences") {
    UtilityParams p;
    for (HouseholdKind d : {HouseholdKind::single, HouseholdKind::couple}) {
        auto u = [&](double h) { return housing_utility(h, d, p); };
        for (double h : {50'000.0, 300'000.0, 900'000.0}) {
            const double gh = p.housing_risk_aversion;
            const double analytic =
                (p.housing_preference / p.scale(d)) *
                std::pow(p.housing_preference * h / p.scale(d), gh - 1.0);
            CHECK(fd(u, h) == doctest::Approx(analytic).epsilon(1e-6));
        }
    }
    CHECK_THROWS_AS(housing_utility(0.0, HouseholdKind::single, UtilityParams{}),
                    std::domain_error);
}

TEST_CASE("housing coefficient factorization is exact") {
    UtilityParams p;
    for (HouseholdKind d : {HouseholdKind::single, HouseholdKind::couple}) {
        const double coeff = housing_utility_coefficient(d, p);
        for (double h : {30'000.0, 123'456.0, 1.5e6}) {
            const double direct = housing_utility(h, d, p);
            const double factored =
                coeff * std::pow(p.housing_preference * h, p.housing_risk_aversion);
            CHECK(direct == doctest::Approx(factored).epsilon(1e-12));
        }
    }
}

TEST_CASE("consumption below the floor is infeasible, not just bad") {
    UtilityParams p;
    CHECK_THROWS_AS(consumption_utility(p.consumption_floor_single, HouseholdKind::single, 65, 65, p),
                    infeasible_consumption);
    CHECK_THROWS_AS(consumption_utility(1'000.0, HouseholdKind::couple, 70, 65, p),
                    infeasible_consumption);
    CHECK_THROWS_AS(consumption_utility(50'000.0, HouseholdKind::single, 60, 65, p),
                    std::domain_error);
}

TEST_CASE("utility fades with the health proxy and couples need more for the same utility") {
    UtilityParams p;
    const double c = 40'000.0;
    // The proxy shrinks the magnitude: consumption matters less at older ages.
    CHECK(std::abs(consumption_utility(c, HouseholdKind::single, 70, 65, p)) <
          std::abs(consumption_utility(c, HouseholdKind::single, 66, 65, p)));
    // Same consumption is worth less to a couple (scaled needs, higher floor).
    CHECK(consumption_utility(c, HouseholdKind::couple, 65, 65, p) <
          consumption_utility(c, HouseholdKind::single, 65, 65, p));
}

TEST_CASE("reward dispatches on the family state") {
    UtilityParams p;
    HouseholdState s;
    s.age = 70;
    s.liquid_wealth = 300'000.0;

    s.family = FamilyState::gone;
    CHECK(reward(s, 40'000.0, 65, p) == 0.0);

    s.family = FamilyState::died_this_year;
    CHECK(reward(s, 40'000.0, 65, p) == doctest::Approx(bequest_utility(300'000.0, p)));

    s.family = FamilyState::single;
    const double base = reward(s, 40'000.0, 65, p);
    CHECK(base == doctest::Approx(consumption_utility(40'000.0, HouseholdKind::single, 70, 65, p)));

    s.homeowner = true;
    s.home_value = 400'000.0;
    CHECK(reward(s, 40'000.0, 65, p) ==
          doctest::Approx(base + housing_utility(400'000.0, HouseholdKind::single, p)));

    CHECK(terminal_reward(s, p) == doctest::Approx(bequest_utility(300'000.0, p)));
    s.family = FamilyState::gone;
    CHECK(terminal_reward(s, p) == 0.0);
}

TEST_CASE("parameter validation") {
    UtilityParams p;
    p.validate();
    p.risk_aversion_single = 0.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = UtilityParams{};
    p.health_decay = 0.9;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = UtilityParams{};
    p.bequest_altruism = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = UtilityParams{};
    p.scale_single = 1.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
