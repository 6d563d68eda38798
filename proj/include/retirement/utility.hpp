#pragma once

#include <stdexcept>

#include "retirement/pension.hpp"

namespace retirement {

// Raised when a consumption level does not exceed the household floor. The
// solver excludes such controls from the feasible set instead of catching it.
class infeasible_consumption : public std::domain_error {
public:
    explicit infeasible_consumption(const char* what) : std::domain_error(what) {}
};

// Preference parameters, keyed by household kind where they differ.
struct UtilityParams {
    double risk_aversion_single = -1.98;   // gamma, < 0
    double risk_aversion_couple = -1.78;
    double housing_risk_aversion = -1.87;  // gamma_H, < 0
    double bequest_altruism = 0.96;        // theta, in [0,1)
    double bequest_threshold = 27200.0;    // a, dollars
    double consumption_floor_single = 13284.0;  // dollars/year
    double consumption_floor_couple = 20607.0;
    double health_decay = 1.18;            // psi, >= 1
    double housing_preference = 0.044;     // lambda, in (0,1]
    double scale_single = 1.0;             // zeta
    double scale_couple = 1.3;

    // Consumption utility fades with the health proxy, but the pull toward
    // the estate does not: the weight on bequest utility, and on the yearly
    // housing flow, grows by health_decay^growth per year of retirement.
    // Exponents in [0,1]; 0 keeps the weight level, 1 cancels the consumption
    // fade exactly. Calibrated against observed drawdown rates and the
    // housing-allocation crossovers between the policy regimes.
    double bequest_weight_growth = 0.7;
    double housing_weight_growth_single = 0.5;
    double housing_weight_growth_couple = 0.7;

    double risk_aversion(HouseholdKind d) const {
        return d == HouseholdKind::single ? risk_aversion_single : risk_aversion_couple;
    }
    double consumption_floor(HouseholdKind d) const {
        return d == HouseholdKind::single ? consumption_floor_single : consumption_floor_couple;
    }
    double scale(HouseholdKind d) const {
        return d == HouseholdKind::single ? scale_single : scale_couple;
    }
    double housing_weight_growth(HouseholdKind d) const {
        return d == HouseholdKind::single ? housing_weight_growth_single
                                          : housing_weight_growth_couple;
    }

    void validate() const;
};

// Family status drives both the per-period reward and the pension parameters.
enum class FamilyState {
    gone,          // deceased in an earlier period, absorbing
    died_this_year,
    single,
    couple,
};

struct HouseholdState {
    int age = 65;
    double liquid_wealth = 0.0;
    FamilyState family = FamilyState::single;
    bool homeowner = false;
    double home_value = 0.0;
};

// Utility of consuming `consumption` dollars this year. The health proxy
// scales utility down by health_decay per year since retirement.
double consumption_utility(double consumption, HouseholdKind d, int age, int retire_age,
                           const UtilityParams& p);

// Utility of leaving `wealth` as a bequest. Finite with bounded marginal
// utility at zero wealth (luxury-bequest form).
double bequest_utility(double wealth, const UtilityParams& p);

// Per-year utility of owning a home of value `home_value`.
double housing_utility(double home_value, HouseholdKind d, const UtilityParams& p);

// Coefficient c_d such that housing_utility(H, d) == c_d * (lambda*H)^gamma_H.
// The solver sums these over time instead of carrying H as a state.
double housing_utility_coefficient(HouseholdKind d, const UtilityParams& p);

// Per-period reward as a function of family state: consumption (plus housing
// when a homeowner) while alive, bequest in the year of death, zero after.
double reward(const HouseholdState& state, double consumption, int retire_age,
              const UtilityParams& p);

// Terminal reward at the maximum age.
double terminal_reward(const HouseholdState& state, const UtilityParams& p);

} // namespace retirement
