#pragma once

// Shared by the unit tests and the acceptance runner: a tiny instance small
// enough for exhaustive enumeration, plus an independent value recursion that
// mirrors the model definition rather than the solver's code paths.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "retirement/solver.hpp"

namespace toy {

// Three decision ages, five wealth nodes, three quadrature nodes: small
// enough for exhaustive enumeration, large enough to exercise every branch.
inline retirement::SolverInputs make_inputs(const retirement::PolicyRegime& regime) {
    retirement::SolverInputs in;
    in.retire_age = 65;
    in.terminal_age = 68;
    in.regime = regime;
    if (regime.income_test_mode == retirement::IncomeTestMode::drawdown_with_deduction)
        in.grandfather = retirement::GrandfatherRecord{300'000.0, 20.0, 65, 0.025};
    in.mortality = retirement::MortalityTable{65, {0.90, 0.85, 0.80}};
    in.grid.wealth_min = 50'000.0;
    in.grid.wealth_max = 800'000.0;
    in.grid.wealth_nodes = 5;
    in.grid.control_grid = 21;
    in.grid.refine_rounds = 0;
    in.grid.quadrature_nodes = 3;
    return in;
}

// Independent value recursion by brute-force enumeration over the same
// control grid. Mirrors the model definition, not the solver's code paths:
// flow utility from the utility module, mortality mixing from the family
// chain, estate flows carrying their age weight.
struct Oracle {
    const retirement::SolverInputs& in;
    retirement::QuadratureRule quad;
    std::vector<double> nodes;

    // value[(age - retire)][g][h][node]
    std::vector<double> value, alpha, delta;

    explicit Oracle(const retirement::SolverInputs& inputs)
        : in(inputs),
          quad(retirement::QuadratureRule::gauss_hermite(in.grid.quadrature_nodes)),
          nodes(in.grid.make_wealth_nodes()) {
        const std::size_t n =
            static_cast<std::size_t>(in.terminal_age - in.retire_age + 1) * 4 * nodes.size();
        value.assign(n, 0.0);
        alpha.assign(n, 0.0);
        delta.assign(n, 0.0);
        run();
    }

    std::size_t idx(int age, retirement::FamilyState g, bool h, std::size_t node) const {
        std::size_t gi = g == retirement::FamilyState::couple ? 1 : 0;
        return ((static_cast<std::size_t>(age - in.retire_age) * 2 + gi) * 2 + (h ? 1 : 0)) *
                   nodes.size() +
               node;
    }

    double bequest_weight(int age) const {
        return std::pow(in.utility.health_decay,
                        in.utility.bequest_weight_growth *
                            static_cast<double>(age - in.retire_age));
    }

    void run() {
        using retirement::FamilyState;
        const int T = in.terminal_age;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (int h = 0; h < 2; ++h)
                for (FamilyState g : {FamilyState::single, FamilyState::couple})
                    value[idx(T, g, h == 1, i)] =
                        retirement::bequest_utility(nodes[i], in.utility) * bequest_weight(T);

        for (int age = T - 1; age >= in.retire_age; --age)
            step(age);
    }

    void step(int age) {
        using namespace retirement;
        constexpr double kNegInf = -std::numeric_limits<double>::infinity();
        const double beta = discount_factor(age, age + 1, in.market.risk_free);
        const double q = in.mortality.survival_prob(age);
        const double a_lo =
            in.enforce_minimum_withdrawal ? in.withdrawals.min_rate(age) : 0.0;
        const int n = in.grid.control_grid;
        const double da = (1.0 - a_lo) / (n - 1);
        const double dd = 1.0 / (n - 1);
        const double bw_next = bequest_weight(age + 1);

        for (int h = 0; h < 2; ++h) {
            const bool owner = h == 1;
            std::vector<double> next_s(nodes.size()), next_c(nodes.size());
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                next_s[i] = value[idx(age + 1, FamilyState::single, owner, i)];
                next_c[i] = value[idx(age + 1, FamilyState::couple, owner, i)];
            }
            ValueInterpolant interp_s(nodes, next_s), interp_c(nodes, next_c);

            for (FamilyState g : {FamilyState::single, FamilyState::couple}) {
                const bool couple = g == FamilyState::couple;
                const HouseholdKind d = couple ? HouseholdKind::couple : HouseholdKind::single;
                for (std::size_t iw = 0; iw < nodes.size(); ++iw) {
                    const double w = nodes[iw];
                    double best_v = kNegInf, best_a = a_lo, best_d = 0.0;
                    for (int i = 0; i < n; ++i) {
                        const double a = a_lo + da * i;
                        const double drawdown = a * w;
                        const double pension = age_pension(w, drawdown, d, owner, in.regime,
                                                           in.grandfather, age);
                        const double c = drawdown + pension;
                        if (!(c > in.utility.consumption_floor(d)))
                            continue;
                        const double u = consumption_utility(c, d, age, in.retire_age, in.utility);
                        for (int j = 0; j < n; ++j) {
                            const double del = dd * j;
                            auto cont = [&](double wp) {
                                const double dead =
                                    couple ? interp_s(wp)
                                           : bequest_utility(wp, in.utility) * bw_next;
                                return q * (couple ? interp_c(wp) : interp_s(wp)) +
                                       (1.0 - q) * dead;
                            };
                            const double ev =
                                expected_continuation(w, a, del, cont, quad, in.market);
                            const double v = u + beta * ev;
                            if (v > best_v) {
                                best_v = v;
                                best_a = a;
                                best_d = del;
                            }
                        }
                    }
                    value[idx(age, g, owner, iw)] = best_v;
                    alpha[idx(age, g, owner, iw)] = best_a;
                    delta[idx(age, g, owner, iw)] = best_d;
                }
            }
        }
    }
};

struct Comparison {
    double value_rel_err = 0.0;  // relative to max(1, |oracle value|)
    double alpha_err = 0.0;
    double delta_err = 0.0;
};

// Solves the instance and measures the worst disagreement with the oracle
// over every (age, family state, homeowner flag, wealth node).
inline Comparison compare_with_oracle(const retirement::SolverInputs& in) {
    using retirement::FamilyState;
    retirement::SolutionSet sol = retirement::solve_policy(in);
    Oracle oracle(in);
    Comparison c;
    for (int age = in.retire_age; age <= in.terminal_age; ++age) {
        for (int h = 0; h < 2; ++h) {
            for (FamilyState g : {FamilyState::single, FamilyState::couple}) {
                for (std::size_t i = 0; i < oracle.nodes.size(); ++i) {
                    const double want = oracle.value[oracle.idx(age, g, h == 1, i)];
                    const double got = sol.value(age, g, h == 1, static_cast<int>(i));
                    c.value_rel_err = std::max(
                        c.value_rel_err, std::abs(got - want) / std::max(1.0, std::abs(want)));
                    if (age < in.terminal_age) {
                        c.alpha_err = std::max(
                            c.alpha_err,
                            std::abs(sol.alpha(age, g, h == 1, static_cast<int>(i)) -
                                     oracle.alpha[oracle.idx(age, g, h == 1, i)]));
                        c.delta_err = std::max(
                            c.delta_err,
                            std::abs(sol.delta(age, g, h == 1, static_cast<int>(i)) -
                                     oracle.delta[oracle.idx(age, g, h == 1, i)]));
                    }
                }
            }
        }
    }
    return c;
}

} // namespace toy
