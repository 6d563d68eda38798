#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "retirement/solver.hpp"

namespace retirement {

struct PathPoint {
    int age = 0;
    double wealth = 0.0;
    double drawdown = 0.0;     // alpha * wealth
    double pension = 0.0;
    double consumption = 0.0;  // drawdown + pension
    double risky_share = 0.0;
};

using LifetimePath = std::vector<PathPoint>;

// Deterministic lifetime path: wealth grows at the expected gross portfolio
// return each year and drawdown follows the solved policy. The family state
// is held fixed at the starting kind. With `median_return` the risky leg
// compounds at its median rather than its mean.
LifetimePath deterministic_path(double start_wealth, const SolverInputs& in,
                                const SolutionSet& sol, HouseholdKind kind, bool homeowner,
                                bool median_return = false);

inline constexpr std::array<double, 5> kQuantileLevels{0.05, 0.25, 0.50, 0.75, 0.95};

struct EnsembleSummary {
    std::vector<int> ages;
    std::vector<int> alive_paths;                       // per age
    std::vector<std::array<double, 5>> wealth;          // quantiles per age
    std::vector<std::array<double, 5>> pension;
    std::vector<std::array<double, 5>> consumption;
};

// Monte Carlo companion to deterministic_path: simulates risky returns and
// family-state transitions; quantiles are taken over paths still alive at
// each age. Bit-reproducible for a fixed seed.
EnsembleSummary monte_carlo_paths(double start_wealth, const SolverInputs& in,
                                  const SolutionSet& sol, HouseholdKind kind, bool homeowner,
                                  int n_paths, std::uint64_t seed);

struct PensionCurvePoint {
    double wealth = 0.0;
    double pension = 0.0;
};

// Pension entitlement over a wealth sweep at a fixed drawdown rate. Under a
// drawdown-tested regime each sweep point is treated as an account opened at
// `age` with that balance, so the deduction scales with the balance.
std::vector<PensionCurvePoint> pension_curve(const PolicyRegime& regime, HouseholdKind d,
                                             bool homeowner, double drawdown_rate, int age,
                                             double life_expectancy, double inflation,
                                             double wealth_max, int n_points);

// Family of pre-2015 solutions spanning a grid of grandfathered opening
// balances. The value relevant at retirement lies on the diagonal where the
// opening balance equals the starting liquid wealth; value_at interpolates
// across the family to evaluate it.
class GrandfatherFamily {
public:
    GrandfatherFamily(std::vector<double> opening_balances, std::vector<SolutionSet> solutions);

    double value_at(double liquid_wealth, FamilyState g, bool homeowner) const;
    const SolutionSet& nearest(double liquid_wealth) const;
    double housing_coeff(FamilyState g) const;

private:
    std::vector<double> opening_balances_;
    std::vector<SolutionSet> solutions_;
};

} // namespace retirement
