#include "retirement/utility.hpp"

#include <cmath>
#include <string>

namespace retirement {

void UtilityParams::validate() const {
    auto fail = [](const char* field) {
        throw std::invalid_argument(std::string("utility params: invalid ") + field);
    };
    if (!(risk_aversion_single < 0.0)) fail("risk_aversion_single");
    if (!(risk_aversion_couple < 0.0)) fail("risk_aversion_couple");
    if (!(housing_risk_aversion < 0.0)) fail("housing_risk_aversion");
    if (!(bequest_altruism >= 0.0 && bequest_altruism < 1.0)) fail("bequest_altruism");
    if (!(bequest_threshold > 0.0)) fail("bequest_threshold");
    if (!(consumption_floor_single > 0.0)) fail("consumption_floor_single");
    if (!(consumption_floor_couple > 0.0)) fail("consumption_floor_couple");
    if (!(health_decay >= 1.0)) fail("health_decay");
    if (!(housing_preference > 0.0 && housing_preference <= 1.0)) fail("housing_preference");
    if (!(scale_single == 1.0)) fail("scale_single (must be 1)");
    if (!(scale_couple >= 1.0)) fail("scale_couple");
    if (!(bequest_weight_growth >= 0.0 && bequest_weight_growth <= 1.0))
        fail("bequest_weight_growth");
    if (!(housing_weight_growth_single >= 0.0 && housing_weight_growth_single <= 1.0))
        fail("housing_weight_growth_single");
    if (!(housing_weight_growth_couple >= 0.0 && housing_weight_growth_couple <= 1.0))
        fail("housing_weight_growth_couple");
}

double consumption_utility(double consumption, HouseholdKind d, int age, int retire_age,
                           const UtilityParams& p) {
    if (age < retire_age)
        throw std::domain_error("consumption_utility: age before retirement");
    const double floor = p.consumption_floor(d);
    if (!(consumption > floor))
        throw infeasible_consumption("consumption at or below the household floor");
    const double gamma = p.risk_aversion(d);
    const double scaled = (consumption - floor) / p.scale(d);
    return std::pow(scaled, gamma) /
           (std::pow(p.health_decay, static_cast<double>(age - retire_age)) * gamma);
}

double bequest_utility(double wealth, const UtilityParams& p) {
    if (wealth < 0.0)
        throw std::domain_error("bequest_utility: negative wealth");
    const double gamma = p.risk_aversion_single;
    const double odds = p.bequest_altruism / (1.0 - p.bequest_altruism);
    return std::pow(odds, 1.0 - gamma) *
           std::pow(odds * p.bequest_threshold + wealth, gamma) / gamma;
}

double housing_utility(double home_value, HouseholdKind d, const UtilityParams& p) {
    if (!(home_value > 0.0))
        throw std::domain_error("housing_utility: home value must be positive");
    const double gamma = p.housing_risk_aversion;
    return std::pow(p.housing_preference * home_value / p.scale(d), gamma) / gamma;
}

double housing_utility_coefficient(HouseholdKind d, const UtilityParams& p) {
    const double gamma = p.housing_risk_aversion;
    return 1.0 / (gamma * std::pow(p.scale(d), gamma));
}

double reward(const HouseholdState& state, double consumption, int retire_age,
              const UtilityParams& p) {
    switch (state.family) {
        case FamilyState::gone:
            return 0.0;
        case FamilyState::died_this_year:
            return bequest_utility(state.liquid_wealth, p);
        case FamilyState::single:
        case FamilyState::couple: {
            const HouseholdKind d = state.family == FamilyState::couple
                                        ? HouseholdKind::couple
                                        : HouseholdKind::single;
            double u = consumption_utility(consumption, d, state.age, retire_age, p);
            if (state.homeowner)
                u += housing_utility(state.home_value, d, p);
            return u;
        }
    }
    return 0.0;
}

double terminal_reward(const HouseholdState& state, const UtilityParams& p) {
    if (state.family == FamilyState::gone)
        return 0.0;
    return bequest_utility(state.liquid_wealth, p);
}

} // namespace retirement
