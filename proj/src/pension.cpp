#include "retirement/pension.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace retirement {

namespace {

void check_rates(const PensionRates& r, const char* kind) {
    auto fail = [&](const char* field) {
        throw std::invalid_argument(std::string("pension rates (") + kind + "): invalid " + field);
    };
    if (!(r.full_pension > 0.0)) fail("full_pension");
    if (!(r.income_threshold > 0.0)) fail("income_threshold");
    if (!(r.income_taper > 0.0 && r.income_taper < 1.0)) fail("income_taper");
    if (!(r.asset_threshold_homeowner > 0.0)) fail("asset_threshold_homeowner");
    if (!(r.asset_threshold_non_homeowner > 0.0)) fail("asset_threshold_non_homeowner");
    if (!(r.asset_threshold_homeowner < r.asset_threshold_non_homeowner))
        fail("asset_threshold ordering (homeowner must be lower)");
    if (!(r.asset_taper > 0.0 && r.asset_taper < 1.0)) fail("asset_taper");
    if (!(r.deeming_threshold > 0.0)) fail("deeming_threshold");
    if (!(r.deeming_rate_low >= 0.0)) fail("deeming_rate_low");
    if (!(r.deeming_rate_low <= r.deeming_rate_high)) fail("deeming rate ordering");
}

} // namespace

void PensionParams::validate() const {
    check_rates(singles, "single");
    check_rates(couples, "couple");
}

double deemed_income(double wealth, HouseholdKind d, const PensionParams& params) {
    if (wealth < 0.0)
        throw std::domain_error("deemed_income: negative wealth");
    const PensionRates& r = params.rates(d);
    return r.deeming_rate_low * std::min(wealth, r.deeming_threshold) +
           r.deeming_rate_high * std::max(0.0, wealth - r.deeming_threshold);
}

double income_test_deduction(const GrandfatherRecord& g, int age) {
    if (age < g.opening_age)
        throw std::domain_error("income_test_deduction: age before account opening");
    if (g.opening_balance == 0.0)
        return 0.0;
    return g.opening_balance / g.life_expectancy *
           std::pow(1.0 + g.inflation, static_cast<double>(g.opening_age - age));
}

double age_pension(double wealth, double drawdown, HouseholdKind d, bool homeowner,
                   const PolicyRegime& regime,
                   const std::optional<GrandfatherRecord>& grandfather, int age) {
    if (wealth < 0.0)
        throw std::domain_error("age_pension: negative wealth");

    const PensionRates& r = regime.params.rates(d);

    double income;
    if (regime.income_test_mode == IncomeTestMode::deemed) {
        income = deemed_income(wealth, d, regime.params);
    } else {
        if (!grandfather.has_value())
            throw std::invalid_argument(
                "age_pension: drawdown income test requires a grandfather record");
        // Assessed income cannot go negative once the deduction exceeds drawdown.
        income = std::max(0.0, drawdown - income_test_deduction(*grandfather, age));
    }

    const double asset_part = r.full_pension - (wealth - r.asset_threshold(homeowner)) * r.asset_taper;
    const double income_part = r.full_pension - (income - r.income_threshold) * r.income_taper;
    return std::max(0.0, std::min(r.full_pension, std::min(asset_part, income_part)));
}

double binding_test_crossover(HouseholdKind d, bool homeowner, const PolicyRegime& regime) {
    if (regime.income_test_mode != IncomeTestMode::deemed)
        throw std::invalid_argument(
            "binding_test_crossover: undefined under a drawdown income test");

    const PensionRates& r = regime.params.rates(d);
    // asset_part - income_part is strictly decreasing in wealth because the
    // asset taper exceeds income_taper * deeming_rate_high for all published
    // rate sets; bisect on the sign change.
    auto diff = [&](double w) {
        double income = r.deeming_rate_low * std::min(w, r.deeming_threshold) +
                        r.deeming_rate_high * std::max(0.0, w - r.deeming_threshold);
        double asset_part = r.full_pension - (w - r.asset_threshold(homeowner)) * r.asset_taper;
        double income_part = r.full_pension - (income - r.income_threshold) * r.income_taper;
        return asset_part - income_part;
    };

    double lo = 0.0;
    double hi = r.asset_threshold(homeowner) + 2.0 * r.full_pension / r.asset_taper;
    if (diff(lo) <= 0.0 || diff(hi) >= 0.0)
        throw std::runtime_error("binding_test_crossover: tests never cross");
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (diff(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double zero_pension_cutoff(HouseholdKind d, bool homeowner, const PolicyRegime& regime) {
    const PensionRates& r = regime.params.rates(d);
    return r.asset_threshold(homeowner) + r.full_pension / r.asset_taper;
}

double full_pension_boundary(HouseholdKind d, bool homeowner, const PolicyRegime& regime) {
    const PensionRates& r = regime.params.rates(d);
    const double asset_bound = r.asset_threshold(homeowner);
    // Income-test free area expressed as a wealth level under deeming.
    double income_bound = asset_bound;
    if (regime.income_test_mode == IncomeTestMode::deemed) {
        double at_kappa = r.deeming_rate_low * r.deeming_threshold;
        if (at_kappa >= r.income_threshold) {
            income_bound = r.income_threshold / r.deeming_rate_low;
        } else {
            income_bound = r.deeming_threshold +
                           (r.income_threshold - at_kappa) / r.deeming_rate_high;
        }
    }
    return std::min(asset_bound, income_bound);
}

} // namespace retirement
