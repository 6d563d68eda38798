#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "retirement/interpolation.hpp"
#include "retirement/lifecycle.hpp"
#include "retirement/pension.hpp"
#include "retirement/utility.hpp"

namespace retirement {

struct GridSpec {
    double wealth_min = 1000.0;
    double wealth_max = 3'000'000.0;
    int wealth_nodes = 120;    // log-spaced
    int control_grid = 21;     // coarse scan per control dimension
    int refine_rounds = 3;     // golden-section coordinate refinement passes
    int quadrature_nodes = 10;

    void validate() const;
    std::vector<double> make_wealth_nodes() const;
};

// Everything one backward-induction run needs. The solve covers both family
// states and both homeownership flags; `grandfather` is required for
// drawdown-tested regimes and its opening balance parameterizes the run.
struct SolverInputs {
    int retire_age = 65;
    int terminal_age = 100;
    PolicyRegime regime;
    std::optional<GrandfatherRecord> grandfather;
    UtilityParams utility;
    MarketParams market;
    MortalityTable mortality;
    WithdrawalSchedule withdrawals = WithdrawalSchedule::regulatory_2016();
    GridSpec grid;
    bool enforce_minimum_withdrawal = true;

    void validate() const;
};

struct SolverDiagnostics {
    std::uint64_t floor_infeasible_states = 0;
    std::uint64_t monotonicity_violations = 0;
    std::uint64_t clamped_below_grid = 0;
};

// Gridded value function and optimal controls over (age, wealth, family
// state, homeowner flag), plus the additively-separable housing coefficient.
class SolutionSet {
public:
    SolutionSet() = default;
    SolutionSet(int retire_age, int terminal_age, std::vector<double> wealth_nodes);

    int retire_age() const { return retire_age_; }
    int terminal_age() const { return terminal_age_; }
    const std::string& regime_label() const { return regime_label_; }
    void set_regime_label(std::string label) { regime_label_ = std::move(label); }
    const std::vector<double>& wealth_nodes() const { return wealth_nodes_; }

    double value(int age, FamilyState g, bool homeowner, int node) const;
    double alpha(int age, FamilyState g, bool homeowner, int node) const;
    double delta(int age, FamilyState g, bool homeowner, int node) const;
    double& value(int age, FamilyState g, bool homeowner, int node);
    double& alpha(int age, FamilyState g, bool homeowner, int node);
    double& delta(int age, FamilyState g, bool homeowner, int node);

    // Expected discounted sum of housing-utility coefficients from `age` on.
    double housing_coeff(int age, FamilyState g) const;
    double& housing_coeff(int age, FamilyState g);

    // Interpolated lookups at off-grid wealth.
    double value_at(int age, FamilyState g, bool homeowner, double wealth) const;
    double alpha_at(int age, FamilyState g, bool homeowner, double wealth) const;
    double delta_at(int age, FamilyState g, bool homeowner, double wealth) const;

    SolverDiagnostics& diagnostics() { return diag_; }
    const SolverDiagnostics& diagnostics() const { return diag_; }

private:
    std::size_t index(int age, FamilyState g, bool homeowner, int node) const;

    int retire_age_ = 0;
    int terminal_age_ = 0;
    std::string regime_label_;
    std::vector<double> wealth_nodes_;
    std::vector<double> value_, alpha_, delta_;
    std::vector<double> housing_coeff_;  // [age][g]
    SolverDiagnostics diag_;
};

struct ControlResult {
    double alpha = 0.0;
    double delta = 0.0;
    double value = 0.0;
};

// Maximizes `objective` over [alpha_lo, alpha_hi] x [delta_lo, delta_hi] by a
// coarse grid scan followed by golden-section coordinate refinement.
// Infeasible points must return -infinity. Deterministic; ties resolve toward
// the smallest alpha, then the smallest delta.
ControlResult optimize_controls(const std::function<double(double, double)>& objective,
                                double alpha_lo, double alpha_hi, double delta_lo,
                                double delta_hi, int grid_n, int refine_rounds);

// One backward step: fills the (age, *, *, *) slice of `sol` from the
// age+1 slice. Exposed for testing; solve_policy drives it.
void bellman_step(int age, const SolverInputs& in, const QuadratureRule& quad,
                  SolutionSet& sol);

SolutionSet solve_policy(const SolverInputs& in);

struct HousingDecision {
    double home_value = 0.0;  // 0 means renting
    double value = 0.0;
};

// Splits total wealth between a home and the allocated pension account.
// `liquid_value` maps (liquid wealth, homeowner flag) to the solved value at
// retirement; `housing_coeff` is the solution's accumulator at retirement.
// Households below `house_min` rent; above it any affordable home dominates
// renting because housing utility diverges as the home value goes to zero.
HousingDecision optimal_housing(double total_wealth,
                                const std::function<double(double, bool)>& liquid_value,
                                double housing_coeff, const UtilityParams& utility,
                                HouseholdKind d, double house_min = 30'000.0);

// Convenience overload querying a single solution set.
HousingDecision optimal_housing(double total_wealth, const SolutionSet& sol, FamilyState g,
                                const UtilityParams& utility, double house_min = 30'000.0);

} // namespace retirement
