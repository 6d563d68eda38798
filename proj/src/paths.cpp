#include "retirement/paths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace retirement {

namespace {

FamilyState state_of(HouseholdKind kind) {
    return kind == HouseholdKind::couple ? FamilyState::couple : FamilyState::single;
}

HouseholdKind kind_of(FamilyState g) {
    return g == FamilyState::couple ? HouseholdKind::couple : HouseholdKind::single;
}

struct Controls {
    double alpha;
    double delta;
};

Controls controls_at(const SolutionSet& sol, const SolverInputs& in, int age, FamilyState g,
                     bool homeowner, double wealth) {
    double lo = in.enforce_minimum_withdrawal ? in.withdrawals.min_rate(age) : 0.0;
    double alpha = std::clamp(sol.alpha_at(age, g, homeowner, wealth), lo, 1.0);
    double delta = std::clamp(sol.delta_at(age, g, homeowner, wealth), 0.0, 1.0);
    return {alpha, delta};
}

// Deterministic 64-bit stream; gives identical draws on every platform.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double next_unit() {  // uniform in (0,1)
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }
    double next_normal() {  // Box-Muller, one draw per call
        double u1 = next_unit();
        double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
};

std::array<double, 5> quantiles(std::vector<double>& values) {
    std::array<double, 5> out{};
    if (values.empty()) {
        out.fill(std::numeric_limits<double>::quiet_NaN());
        return out;
    }
    std::sort(values.begin(), values.end());
    for (std::size_t i = 0; i < kQuantileLevels.size(); ++i) {
        double r = kQuantileLevels[i] * static_cast<double>(values.size() - 1);
        std::size_t lo = static_cast<std::size_t>(r);
        std::size_t hi = std::min(lo + 1, values.size() - 1);
        double frac = r - static_cast<double>(lo);
        out[i] = values[lo] + frac * (values[hi] - values[lo]);
    }
    return out;
}

} // namespace

LifetimePath deterministic_path(double start_wealth, const SolverInputs& in,
                                const SolutionSet& sol, HouseholdKind kind, bool homeowner,
                                bool median_return) {
    if (sol.regime_label() != in.regime.label)
        throw std::invalid_argument("deterministic_path: solution solved under regime '" +
                                    sol.regime_label() + "', inputs specify '" + in.regime.label +
                                    "'");
    const FamilyState g = state_of(kind);
    const double er = std::exp(in.market.risk_free);
    const double expected_risky =
        median_return ? std::exp(in.market.real_drift())
                      : std::exp(in.market.real_drift() +
                                 0.5 * in.market.risky_vol * in.market.risky_vol);

    LifetimePath path;
    double wealth = start_wealth;
    for (int t = in.retire_age; t < in.terminal_age; ++t) {
        Controls c = controls_at(sol, in, t, g, homeowner, wealth);
        double drawdown = c.alpha * wealth;
        double pension = age_pension(wealth, drawdown, kind, homeowner, in.regime,
                                     in.grandfather, t);
        path.push_back({t, wealth, drawdown, pension, drawdown + pension, c.delta});
        wealth = (wealth - drawdown) * (c.delta * expected_risky + (1.0 - c.delta) * er);
    }
    return path;
}

EnsembleSummary monte_carlo_paths(double start_wealth, const SolverInputs& in,
                                  const SolutionSet& sol, HouseholdKind kind, bool homeowner,
                                  int n_paths, std::uint64_t seed) {
    if (n_paths < 1)
        throw std::invalid_argument("monte_carlo_paths: need at least one path");

    const int t0 = in.retire_age;
    const int horizon = in.terminal_age - t0;
    const double er = std::exp(in.market.risk_free);
    const double m = in.market.real_drift();

    // Per-age samples across paths still alive.
    std::vector<std::vector<double>> wealth_s(static_cast<std::size_t>(horizon));
    std::vector<std::vector<double>> pension_s(static_cast<std::size_t>(horizon));
    std::vector<std::vector<double>> consumption_s(static_cast<std::size_t>(horizon));

    for (int p = 0; p < n_paths; ++p) {
        SplitMix64 rng{seed ^ (0xD1B54A32D192ED03ull * static_cast<std::uint64_t>(p + 1))};
        FamilyState g = state_of(kind);
        double wealth = start_wealth;
        for (int i = 0; i < horizon; ++i) {
            const int t = t0 + i;
            Controls c = controls_at(sol, in, t, g, homeowner, wealth);
            double drawdown = c.alpha * wealth;
            double pension = age_pension(wealth, drawdown, kind_of(g), homeowner, in.regime,
                                         in.grandfather, t);
            wealth_s[static_cast<std::size_t>(i)].push_back(wealth);
            pension_s[static_cast<std::size_t>(i)].push_back(pension);
            consumption_s[static_cast<std::size_t>(i)].push_back(drawdown + pension);

            // One return draw and one mortality draw per year, in that order.
            double z = m + in.market.risky_vol * rng.next_normal();
            wealth = (wealth - drawdown) * (c.delta * std::exp(z) + (1.0 - c.delta) * er);
            double u = rng.next_unit();
            double q = in.mortality.survival_prob(t);
            if (u >= q) {
                if (g == FamilyState::couple)
                    g = FamilyState::single;
                else
                    break;  // death; path stops contributing
            }
        }
    }

    EnsembleSummary summary;
    for (int i = 0; i < horizon; ++i) {
        summary.ages.push_back(t0 + i);
        summary.alive_paths.push_back(static_cast<int>(wealth_s[static_cast<std::size_t>(i)].size()));
        summary.wealth.push_back(quantiles(wealth_s[static_cast<std::size_t>(i)]));
        summary.pension.push_back(quantiles(pension_s[static_cast<std::size_t>(i)]));
        summary.consumption.push_back(quantiles(consumption_s[static_cast<std::size_t>(i)]));
    }
    return summary;
}

std::vector<PensionCurvePoint> pension_curve(const PolicyRegime& regime, HouseholdKind d,
                                             bool homeowner, double drawdown_rate, int age,
                                             double life_expectancy, double inflation,
                                             double wealth_max, int n_points) {
    if (!(drawdown_rate >= 0.0 && drawdown_rate <= 1.0))
        throw std::invalid_argument("pension_curve: drawdown rate out of [0,1]");
    if (n_points < 2)
        throw std::invalid_argument("pension_curve: need at least two points");

    const bool drawdown_mode = regime.income_test_mode == IncomeTestMode::drawdown_with_deduction;
    std::vector<PensionCurvePoint> curve;
    curve.reserve(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        double w = wealth_max * i / (n_points - 1);
        std::optional<GrandfatherRecord> gf;
        if (drawdown_mode)
            gf = GrandfatherRecord{w, life_expectancy, age, inflation};
        double p = age_pension(w, drawdown_rate * w, d, homeowner, regime, gf, age);
        curve.push_back({w, p});
    }
    return curve;
}

GrandfatherFamily::GrandfatherFamily(std::vector<double> opening_balances,
                                     std::vector<SolutionSet> solutions)
    : opening_balances_(std::move(opening_balances)), solutions_(std::move(solutions)) {
    if (opening_balances_.size() != solutions_.size() || opening_balances_.empty())
        throw std::invalid_argument("GrandfatherFamily: balances and solutions must match");
    for (std::size_t i = 1; i < opening_balances_.size(); ++i)
        if (!(opening_balances_[i] > opening_balances_[i - 1]))
            throw std::invalid_argument("GrandfatherFamily: balances must be increasing");
}

double GrandfatherFamily::value_at(double liquid_wealth, FamilyState g, bool homeowner) const {
    const int t0 = solutions_.front().retire_age();
    if (solutions_.size() == 1)
        return solutions_.front().value_at(t0, g, homeowner, liquid_wealth);
    std::vector<double> v(solutions_.size());
    for (std::size_t j = 0; j < solutions_.size(); ++j)
        v[j] = solutions_[j].value_at(t0, g, homeowner, liquid_wealth);
    // Diagonal: the account opened with exactly the starting liquid wealth.
    return MonotoneCubic(opening_balances_, v)(
        std::clamp(liquid_wealth, opening_balances_.front(), opening_balances_.back()));
}

const SolutionSet& GrandfatherFamily::nearest(double liquid_wealth) const {
    std::size_t best = 0;
    for (std::size_t j = 1; j < opening_balances_.size(); ++j)
        if (std::abs(opening_balances_[j] - liquid_wealth) <
            std::abs(opening_balances_[best] - liquid_wealth))
            best = j;
    return solutions_[best];
}

double GrandfatherFamily::housing_coeff(FamilyState g) const {
    const SolutionSet& s = solutions_.front();
    return s.housing_coeff(s.retire_age(), g);
}

} // namespace retirement
