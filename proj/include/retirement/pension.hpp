#pragma once

#include <optional>
#include <string>

namespace retirement {

enum class HouseholdKind { single, couple };

// Income assessment for the pension income-test. Accounts opened before
// 2015 are assessed on actual drawdown less a fixed deduction; newer
// accounts are assessed on deemed income from the account balance.
enum class IncomeTestMode { drawdown_with_deduction, deemed };

// Means-test rates for one household kind, in dollars per year unless noted.
struct PensionRates {
    double full_pension = 0.0;                 // maximum annual payment
    double income_threshold = 0.0;             // income-test free area
    double income_taper = 0.0;                 // reduction per dollar of income
    double asset_threshold_homeowner = 0.0;
    double asset_threshold_non_homeowner = 0.0;
    double asset_taper = 0.0;                  // reduction per dollar of assets
    double deeming_threshold = 0.0;
    double deeming_rate_low = 0.0;             // below the deeming threshold
    double deeming_rate_high = 0.0;            // above the deeming threshold

    double asset_threshold(bool homeowner) const {
        return homeowner ? asset_threshold_homeowner : asset_threshold_non_homeowner;
    }
};

struct PensionParams {
    PensionRates singles;
    PensionRates couples;

    const PensionRates& rates(HouseholdKind d) const {
        return d == HouseholdKind::single ? singles : couples;
    }

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct PolicyRegime {
    PensionParams params;
    IncomeTestMode income_test_mode = IncomeTestMode::deemed;
    std::string label;
};

// Data fixed at account opening for grandfathered (pre-2015) accounts.
struct GrandfatherRecord {
    double opening_balance = 0.0;   // account balance when opened
    double life_expectancy = 0.0;   // expected remaining lifetime at opening, years
    int opening_age = 65;
    double inflation = 0.0;         // per year, discounts the nominal deduction
};

// Imputed annual income from financial assets of a household with balance
// `wealth`. Piecewise linear, continuous and non-decreasing.
double deemed_income(double wealth, HouseholdKind d, const PensionParams& params);

// Annual income-test deduction available to a grandfathered account at `age`,
// expressed in real terms.
double income_test_deduction(const GrandfatherRecord& g, int age);

// Annual Age Pension entitlement, evaluated on the start-of-year balance
// before drawdown. `grandfather` is required exactly when the regime assesses
// income on drawdown. Result lies in [0, full_pension].
double age_pension(double wealth, double drawdown, HouseholdKind d, bool homeowner,
                   const PolicyRegime& regime,
                   const std::optional<GrandfatherRecord>& grandfather, int age);

// Wealth at which the asset test and the (deemed) income test produce the
// same partial pension. Only defined for deemed-income regimes.
double binding_test_crossover(HouseholdKind d, bool homeowner, const PolicyRegime& regime);

// Wealth at which the asset test extinguishes the pension entirely.
double zero_pension_cutoff(HouseholdKind d, bool homeowner, const PolicyRegime& regime);

// Wealth up to which the full pension is paid under a deemed-income regime.
double full_pension_boundary(HouseholdKind d, bool homeowner, const PolicyRegime& regime);

} // namespace retirement
