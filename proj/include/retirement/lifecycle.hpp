#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "retirement/utility.hpp"

namespace retirement {

// One-year survival probabilities indexed by age. A couple is keyed to a
// single age (both partners treated as the oldest partner's age).
struct MortalityTable {
    int first_age = 65;
    std::vector<double> survival;  // survival[i]: alive at first_age+i -> alive at +i+1

    int last_age() const { return first_age + static_cast<int>(survival.size()); }

    double survival_prob(int age) const;

    // Expected remaining lifetime at `age` (curtate expectation plus half a year).
    double life_expectancy(int age) const;

    void validate() const;

    // Delimited file with header "age,male_survival,female_survival" or
    // "age,unisex_survival". Sex-specific tables are averaged into a unisex one.
    static MortalityTable load_csv(const std::string& path);
    static MortalityTable parse_csv(const std::string& text, const std::string& source_name);
};

struct MarketParams {
    double risky_drift = 0.081;   // mu, nominal per year
    double risky_vol = 0.133;     // sigma
    double risk_free = 0.005;     // r, real per year
    double inflation = 0.025;     // assumed; enters the real drift and the
                                  // grandfathered deduction only

    double real_drift() const { return risky_drift - inflation; }
    void validate() const;
};

// Age-banded regulatory minimum drawdown rates for allocated pension accounts.
struct WithdrawalSchedule {
    struct Band {
        int from_age;
        double rate;
    };
    std::vector<Band> bands;  // ascending from_age; first band covers all younger ages

    double min_rate(int age) const;
    void validate() const;

    static WithdrawalSchedule regulatory_2016();
};

// Nodes are standardized draws: E[f(Z)] for Z ~ N(m, s^2) is approximated by
// sum_k weight[k] * f(m + s * node[k]).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    void validate() const;
    static QuadratureRule gauss_hermite(int n);
};

// Account balance carried into next year after drawing down a fraction alpha
// and investing a fraction delta of the remainder at realized log-return z.
inline double wealth_step(double wealth, double alpha, double delta, double z, double risk_free) {
    return (wealth - alpha * wealth) *
           (delta * std::exp(z) + (1.0 - delta) * std::exp(risk_free));
}

struct FamilyTransition {
    FamilyState state;
    double prob;
};

// One-step distribution of the family state chain. Couples lose at most one
// member per year; death states are absorbing into `gone`.
std::vector<FamilyTransition> family_transition_probs(FamilyState g, int age,
                                                      const MortalityTable& table);

// Expected years until a couple household keyed to `age` has no surviving
// member, under the couple -> single -> dead chain. Exceeds the single
// life expectancy; both use the curtate-plus-half-year convention.
double household_life_expectancy(const MortalityTable& table, int age);

// exp(-rate * (t_prime - t)); multiplicative in concatenated horizons and 1
// on an empty horizon.
double discount_factor(int t, int t_prime, double rate);

// Expectation of `continuation` over next-period wealth under the market's
// lognormal return, by quadrature.
template <class F>
double expected_continuation(double wealth, double alpha, double delta, F&& continuation,
                             const QuadratureRule& quad, const MarketParams& market) {
    const double m = market.real_drift();
    double acc = 0.0;
    for (std::size_t k = 0; k < quad.nodes.size(); ++k) {
        const double z = m + market.risky_vol * quad.nodes[k];
        acc += quad.weights[k] * continuation(wealth_step(wealth, alpha, delta, z, market.risk_free));
    }
    return acc;
}

} // namespace retirement
