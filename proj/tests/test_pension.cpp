#include <doctest.h>

#include <cmath>

#include "retirement/config.hpp"
#include "retirement/lifecycle.hpp"
#include "retirement/pension.hpp"

using namespace retirement;

namespace {

const RegimeMap& regimes() {
    static const RegimeMap map =
        load_policy_file(std::string(RETIREMENT_DATA_DIR) + "/pension_rates.json");
    return map;
}

const PolicyRegime& regime(const char* label) { return regimes().at(label); }

const MortalityTable& life_table() {
    static const MortalityTable table =
        MortalityTable::load_csv(std::string(RETIREMENT_DATA_DIR) + "/life_table_au.csv");
    return table;
}

} // namespace

TEST_CASE("policy file carries the three regimes") {
    CHECK(regimes().count("pre2015") == 1);
    CHECK(regimes().count("post2015") == 1);
    CHECK(regimes().count("post2015r") == 1);
    CHECK(regime("pre2015").income_test_mode == IncomeTestMode::drawdown_with_deduction);
    CHECK(regime("post2015").income_test_mode == IncomeTestMode::deemed);
    CHECK(regime("post2015r").income_test_mode == IncomeTestMode::deemed);
}

TEST_CASE("deemed income is continuous, piecewise linear, and increasing") {
    const PensionParams& p = regime("post2015").params;
    for (HouseholdKind d : {HouseholdKind::single, HouseholdKind::couple}) {
        const PensionRates& r = p.rates(d);
        CHECK(deemed_income(0.0, d, p) == 0.0);
        // Below the threshold only the low rate applies.
        CHECK(deemed_income(10'000.0, d, p) == doctest::Approx(10'000.0 * r.deeming_rate_low));
        // Continuity at the threshold.
        const double at = deemed_income(r.deeming_threshold, d, p);
        CHECK(at == doctest::Approx(r.deeming_threshold * r.deeming_rate_low));
        CHECK(deemed_income(r.deeming_threshold + 1.0, d, p) ==
              doctest::Approx(at + r.deeming_rate_high));
        // Monotone on a sweep.
        double prev = -1.0;
        for (double w = 0.0; w <= 1e6; w += 12'345.0) {
            double inc = deemed_income(w, d, p);
            CHECK(inc >= prev);
            prev = inc;
        }
    }
    CHECK_THROWS_AS(deemed_income(-1.0, HouseholdKind::single, p), std::domain_error);
}

TEST_CASE("deemed pension at the reference wealth point") {
    // Couple, $500k, non-homeowner: deemed income 15,026 -> partial pension 30,535.
    double p = age_pension(500'000.0, 0.0, HouseholdKind::couple, false, regime("post2015"),
                           std::nullopt, 65);
    CHECK(p == doctest::Approx(30'535.0).epsilon(1e-6));
}

TEST_CASE("binding test crossovers match the published values within $1") {
    const PolicyRegime& post = regime("post2015");
    CHECK(std::abs(binding_test_crossover(HouseholdKind::single, false, post) - 508'066.0) < 1.0);
    CHECK(std::abs(binding_test_crossover(HouseholdKind::single, true, post) - 248'352.0) < 1.0);
    CHECK(std::abs(binding_test_crossover(HouseholdKind::couple, false, post) - 574'242.0) < 1.0);
    CHECK(std::abs(binding_test_crossover(HouseholdKind::couple, true, post) - 314'527.0) < 1.0);
    CHECK_THROWS_AS(binding_test_crossover(HouseholdKind::single, false, regime("pre2015")),
                    std::invalid_argument);
}

TEST_CASE("zero cutoff and full boundary bracket the partial-pension range") {
    for (const char* label : {"post2015", "post2015r"}) {
        const PolicyRegime& reg = regime(label);
        for (HouseholdKind d : {HouseholdKind::single, HouseholdKind::couple}) {
            for (bool h : {false, true}) {
                const PensionRates& r = reg.params.rates(d);
                const double full = full_pension_boundary(d, h, reg);
                const double zero = zero_pension_cutoff(d, h, reg);
                CHECK(zero == doctest::Approx(r.asset_threshold(h) + r.full_pension / r.asset_taper));
                CHECK(full < zero);
                CHECK(age_pension(full - 1.0, 0.0, d, h, reg, std::nullopt, 65) ==
                      doctest::Approx(r.full_pension));
                CHECK(age_pension(full + 100.0, 0.0, d, h, reg, std::nullopt, 65) <
                      r.full_pension);
                CHECK(age_pension(zero + 1.0, 0.0, d, h, reg, std::nullopt, 65) == 0.0);
                CHECK(age_pension(zero - 100.0, 0.0, d, h, reg, std::nullopt, 65) > 0.0);
            }
        }
    }
    // Asset-test rebalancing roughly halves the single non-homeowner cutoff gap.
    CHECK(zero_pension_cutoff(HouseholdKind::single, false, regime("post2015")) ==
          doctest::Approx(943'089.74).epsilon(1e-6));
    CHECK(zero_pension_cutoff(HouseholdKind::single, false, regime("post2015r")) ==
          doctest::Approx(741'294.87).epsilon(1e-6));
}

TEST_CASE("grandfathered deduction deflates the opening-balance annuity") {
    GrandfatherRecord g{500'000.0, 20.0, 65, 0.025};
    CHECK(income_test_deduction(g, 65) == doctest::Approx(25'000.0));
    CHECK(income_test_deduction(g, 66) == doctest::Approx(25'000.0 / 1.025));
    CHECK(income_test_deduction(g, 75) == doctest::Approx(25'000.0 * std::pow(1.025, -10.0)));
    CHECK_THROWS_AS(income_test_deduction(g, 64), std::domain_error);
    GrandfatherRecord empty{0.0, 20.0, 65, 0.025};
    CHECK(income_test_deduction(empty, 80) == 0.0);
}

TEST_CASE("drawdown-tested pension at the reference wealth point") {
    // Single, $500k, 5% drawdown at 65: the deduction nearly cancels the
    // drawdown, so the asset test governs.
    const double e = life_table().life_expectancy(65);
    GrandfatherRecord g{500'000.0, e, 65, 0.025};
    double p = age_pension(500'000.0, 25'000.0, HouseholdKind::single, false, regime("pre2015"),
                           g, 65);
    CHECK(income_test_deduction(g, 65) == doctest::Approx(24'764.28).epsilon(1e-4));
    CHECK(p == doctest::Approx(17'280.50).epsilon(1e-5));
    // Without a record the drawdown test cannot be evaluated.
    CHECK_THROWS_AS(age_pension(500'000.0, 25'000.0, HouseholdKind::single, false,
                                regime("pre2015"), std::nullopt, 65),
                    std::invalid_argument);
}

TEST_CASE("pension is clamped to [0, full] and weakly decreasing in wealth") {
    for (const char* label : {"post2015", "post2015r"}) {
        const PolicyRegime& reg = regime(label);
        for (HouseholdKind d : {HouseholdKind::single, HouseholdKind::couple}) {
            double prev = reg.params.rates(d).full_pension + 1.0;
            for (double w = 0.0; w <= 1.5e6; w += 7'919.0) {
                double p = age_pension(w, 0.0, d, false, reg, std::nullopt, 70);
                CHECK(p >= 0.0);
                CHECK(p <= reg.params.rates(d).full_pension);
                CHECK(p <= prev + 1e-9);
                prev = p;
            }
        }
    }
}

TEST_CASE("rate validation names the offending field") {
    PensionParams p = regime("post2015").params;
    p.singles.income_taper = 0.0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("income_taper"), std::invalid_argument);
    p = regime("post2015").params;
    p.couples.asset_threshold_homeowner = p.couples.asset_threshold_non_homeowner + 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
