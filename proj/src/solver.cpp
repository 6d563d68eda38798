#include "retirement/solver.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

namespace retirement {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void parallel_for(int n, const std::function<void(int)>& body) {
    unsigned hw = std::thread::hardware_concurrency();
    int n_threads = std::min<int>(n, hw ? static_cast<int>(hw) : 4);
    if (n_threads <= 1) {
        for (int i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::exception_ptr error;
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            try {
                for (int i = next.fetch_add(1); i < n && !failed.load(); i = next.fetch_add(1))
                    body(i);
            } catch (...) {
                if (!failed.exchange(true))
                    error = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

// Golden-section maximization on [lo, hi]; updates best_x/best_v only on a
// strict improvement so flat objectives keep the caller's tie-break.
void golden_max(const std::function<double(double)>& f, double lo, double hi, double tol,
                double& best_x, double& best_v) {
    if (!(hi > lo))
        return;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    double x = fc > fd ? c : d;
    double v = std::max(fc, fd);
    if (v > best_v) {
        best_v = v;
        best_x = x;
    }
}

int family_index(FamilyState g) {
    switch (g) {
        case FamilyState::single: return 0;
        case FamilyState::couple: return 1;
        default:
            throw std::invalid_argument("solution set stores alive family states only");
    }
}

HouseholdKind kind_of(FamilyState g) {
    return g == FamilyState::couple ? HouseholdKind::couple : HouseholdKind::single;
}

} // namespace

void GridSpec::validate() const {
    if (!(wealth_min > 0.0 && wealth_max > wealth_min))
        throw std::invalid_argument("grid: wealth bounds must satisfy 0 < min < max");
    if (wealth_nodes < 2)
        throw std::invalid_argument("grid: need at least two wealth nodes");
    if (control_grid < 2)
        throw std::invalid_argument("grid: control grid must have at least two points");
    if (refine_rounds < 0)
        throw std::invalid_argument("grid: negative refine rounds");
    if (quadrature_nodes < 1)
        throw std::invalid_argument("grid: need at least one quadrature node");
}

std::vector<double> GridSpec::make_wealth_nodes() const {
    validate();
    std::vector<double> nodes(static_cast<std::size_t>(wealth_nodes));
    const double lmin = std::log(wealth_min), lmax = std::log(wealth_max);
    for (int i = 0; i < wealth_nodes; ++i)
        nodes[static_cast<std::size_t>(i)] =
            std::exp(lmin + (lmax - lmin) * i / (wealth_nodes - 1));
    nodes.front() = wealth_min;
    nodes.back() = wealth_max;
    return nodes;
}

void SolverInputs::validate() const {
    if (!(terminal_age > retire_age))
        throw std::invalid_argument("solver inputs: terminal age must exceed retirement age");
    regime.params.validate();
    const bool drawdown_mode = regime.income_test_mode == IncomeTestMode::drawdown_with_deduction;
    if (drawdown_mode && !grandfather.has_value())
        throw std::invalid_argument(
            "solver inputs: drawdown-tested regime requires a grandfather record");
    if (!drawdown_mode && grandfather.has_value())
        throw std::invalid_argument(
            "solver inputs: grandfather record given for a deemed-income regime");
    if (grandfather) {
        if (!(grandfather->opening_balance >= 0.0))
            throw std::invalid_argument("grandfather record: negative opening balance");
        if (!(grandfather->life_expectancy > 0.0))
            throw std::invalid_argument("grandfather record: non-positive life expectancy");
    }
    utility.validate();
    market.validate();
    mortality.validate();
    if (mortality.first_age > retire_age || mortality.last_age() < terminal_age)
        throw std::invalid_argument("solver inputs: mortality table does not cover the horizon");
    withdrawals.validate();
    grid.validate();
}

SolutionSet::SolutionSet(int retire_age, int terminal_age, std::vector<double> wealth_nodes)
    : retire_age_(retire_age), terminal_age_(terminal_age), wealth_nodes_(std::move(wealth_nodes)) {
    const std::size_t n_ages = static_cast<std::size_t>(terminal_age_ - retire_age_ + 1);
    const std::size_t n = n_ages * 2 * 2 * wealth_nodes_.size();
    value_.assign(n, 0.0);
    alpha_.assign(n, 0.0);
    delta_.assign(n, 0.0);
    housing_coeff_.assign(n_ages * 2, 0.0);
}

std::size_t SolutionSet::index(int age, FamilyState g, bool homeowner, int node) const {
    if (age < retire_age_ || age > terminal_age_)
        throw std::domain_error("solution set: age out of range");
    if (node < 0 || node >= static_cast<int>(wealth_nodes_.size()))
        throw std::domain_error("solution set: node out of range");
    const std::size_t nw = wealth_nodes_.size();
    return ((static_cast<std::size_t>(age - retire_age_) * 2 +
             static_cast<std::size_t>(family_index(g))) *
                2 +
            (homeowner ? 1u : 0u)) *
               nw +
           static_cast<std::size_t>(node);
}

double SolutionSet::value(int age, FamilyState g, bool homeowner, int node) const {
    return value_[index(age, g, homeowner, node)];
}
double SolutionSet::alpha(int age, FamilyState g, bool homeowner, int node) const {
    return alpha_[index(age, g, homeowner, node)];
}
double SolutionSet::delta(int age, FamilyState g, bool homeowner, int node) const {
    return delta_[index(age, g, homeowner, node)];
}
double& SolutionSet::value(int age, FamilyState g, bool homeowner, int node) {
    return value_[index(age, g, homeowner, node)];
}
double& SolutionSet::alpha(int age, FamilyState g, bool homeowner, int node) {
    return alpha_[index(age, g, homeowner, node)];
}
double& SolutionSet::delta(int age, FamilyState g, bool homeowner, int node) {
    return delta_[index(age, g, homeowner, node)];
}

double SolutionSet::housing_coeff(int age, FamilyState g) const {
    return housing_coeff_[static_cast<std::size_t>(age - retire_age_) * 2 +
                          static_cast<std::size_t>(family_index(g))];
}
double& SolutionSet::housing_coeff(int age, FamilyState g) {
    return housing_coeff_[static_cast<std::size_t>(age - retire_age_) * 2 +
                          static_cast<std::size_t>(family_index(g))];
}

namespace {

std::vector<double> extract_row(const SolutionSet& sol, int age, FamilyState g, bool homeowner,
                                int which) {
    const int nw = static_cast<int>(sol.wealth_nodes().size());
    std::vector<double> row(static_cast<std::size_t>(nw));
    for (int i = 0; i < nw; ++i)
        row[static_cast<std::size_t>(i)] = which == 0   ? sol.value(age, g, homeowner, i)
                                           : which == 1 ? sol.alpha(age, g, homeowner, i)
                                                        : sol.delta(age, g, homeowner, i);
    return row;
}

} // namespace

double SolutionSet::value_at(int age, FamilyState g, bool homeowner, double wealth) const {
    ValueInterpolant interp(wealth_nodes_, extract_row(*this, age, g, homeowner, 0));
    return interp(wealth);
}
double SolutionSet::alpha_at(int age, FamilyState g, bool homeowner, double wealth) const {
    return linear_interp(wealth_nodes_, extract_row(*this, age, g, homeowner, 1), wealth);
}
double SolutionSet::delta_at(int age, FamilyState g, bool homeowner, double wealth) const {
    return linear_interp(wealth_nodes_, extract_row(*this, age, g, homeowner, 2), wealth);
}

ControlResult optimize_controls(const std::function<double(double, double)>& objective,
                                double alpha_lo, double alpha_hi, double delta_lo,
                                double delta_hi, int grid_n, int refine_rounds) {
    if (grid_n < 2)
        throw std::invalid_argument("optimize_controls: control grid too small");
    alpha_hi = std::max(alpha_hi, alpha_lo);
    delta_hi = std::max(delta_hi, delta_lo);

    ControlResult best{alpha_lo, delta_lo, kNegInf};
    const double da = (alpha_hi - alpha_lo) / (grid_n - 1);
    const double dd = (delta_hi - delta_lo) / (grid_n - 1);
    for (int i = 0; i < grid_n; ++i) {
        const double a = alpha_lo + da * i;
        for (int j = 0; j < grid_n; ++j) {
            const double d = delta_lo + dd * j;
            const double v = objective(a, d);
            if (v > best.value) {
                best = {a, d, v};
            }
        }
    }
    if (best.value == kNegInf)
        return best;

    constexpr double tol = 1e-6;
    for (int round = 0; round < refine_rounds; ++round) {
        const double d_fixed = best.delta;
        golden_max([&](double a) { return objective(a, d_fixed); },
                   std::max(alpha_lo, best.alpha - da), std::min(alpha_hi, best.alpha + da), tol,
                   best.alpha, best.value);
        const double a_fixed = best.alpha;
        golden_max([&](double d) { return objective(a_fixed, d); },
                   std::max(delta_lo, best.delta - dd), std::min(delta_hi, best.delta + dd), tol,
                   best.delta, best.value);
    }
    return best;
}

void bellman_step(int age, const SolverInputs& in, const QuadratureRule& quad, SolutionSet& sol) {
    const int t0 = in.retire_age;
    const std::vector<double>& nodes = sol.wealth_nodes();
    const int nw = static_cast<int>(nodes.size());

    const double beta = discount_factor(age, age + 1, in.market.risk_free);
    // Bequests received next year carry their age weight; the surviving-state
    // continuation already embeds the weights of its own future bequests.
    const double bequest_w_next =
        std::pow(in.utility.health_decay,
                 in.utility.bequest_weight_growth * static_cast<double>(age + 1 - t0));
    const double q = in.mortality.survival_prob(age);
    const double alpha_min = in.enforce_minimum_withdrawal ? in.withdrawals.min_rate(age) : 0.0;
    const bool deemed = in.regime.income_test_mode == IncomeTestMode::deemed;

    // Gross factors at the quadrature nodes.
    const std::size_t nq = quad.nodes.size();
    std::vector<double> ez(nq);
    for (std::size_t k = 0; k < nq; ++k)
        ez[k] = std::exp(in.market.real_drift() + in.market.risky_vol * quad.nodes[k]);
    const double er = std::exp(in.market.risk_free);
    std::atomic<std::uint64_t> floor_infeasible{0};

    for (int h = 0; h < 2; ++h) {
        const bool homeowner = h == 1;
        ValueInterpolant next_single(nodes,
                                     extract_row(sol, age + 1, FamilyState::single, homeowner, 0));
        ValueInterpolant next_couple(nodes,
                                     extract_row(sol, age + 1, FamilyState::couple, homeowner, 0));

        for (FamilyState g : {FamilyState::single, FamilyState::couple}) {
            const HouseholdKind d = kind_of(g);
            const double floor = in.utility.consumption_floor(d);
            const double gamma = in.utility.risk_aversion(d);
            const double inv_scale = 1.0 / in.utility.scale(d);
            // Mirrors consumption_utility; kept inline to stay exception-free
            // in the hot loop (infeasible points return -inf instead).
            const double inv_health_gamma =
                1.0 / (std::pow(in.utility.health_decay, static_cast<double>(age - t0)) * gamma);
            const bool couple = g == FamilyState::couple;
            const ValueInterpolant& survive = couple ? next_couple : next_single;

            parallel_for(nw, [&](int iw) {
                const double wealth = nodes[static_cast<std::size_t>(iw)];
                const double fixed_pension =
                    deemed ? age_pension(wealth, 0.0, d, homeowner, in.regime, in.grandfather, age)
                           : 0.0;

                auto continuation = [&](double alpha, double delta) {
                    const double base = wealth - alpha * wealth;
                    double acc = 0.0;
                    for (std::size_t k = 0; k < nq; ++k) {
                        const double wp = base * (delta * ez[k] + (1.0 - delta) * er);
                        const double dead = couple
                                                ? next_single(wp)
                                                : bequest_utility(wp, in.utility) * bequest_w_next;
                        acc += quad.weights[k] * (q * survive(wp) + (1.0 - q) * dead);
                    }
                    return acc;
                };

                auto consumption_of = [&](double alpha) {
                    const double drawdown = alpha * wealth;
                    const double pension =
                        deemed ? fixed_pension
                               : age_pension(wealth, drawdown, d, homeowner, in.regime,
                                             in.grandfather, age);
                    return drawdown + pension;
                };

                auto objective = [&](double alpha, double delta) {
                    const double consumption = consumption_of(alpha);
                    if (!(consumption > floor))
                        return kNegInf;
                    const double u =
                        std::pow((consumption - floor) * inv_scale, gamma) * inv_health_gamma;
                    return u + beta * continuation(alpha, delta);
                };

                ControlResult best = optimize_controls(objective, alpha_min, 1.0, 0.0, 1.0,
                                                       in.grid.control_grid, in.grid.refine_rounds);
                if (best.value == kNegInf) {
                    // Even full drawdown plus pension cannot reach the floor.
                    best.alpha = 1.0;
                    best.delta = 0.0;
                    const double clamped = floor * (1.0 + 1e-9);
                    const double u = std::pow((clamped - floor) * inv_scale, gamma) * inv_health_gamma;
                    best.value = u + beta * continuation(1.0, 0.0);
                    floor_infeasible.fetch_add(1, std::memory_order_relaxed);
                }
                sol.value(age, g, homeowner, iw) = best.value;
                sol.alpha(age, g, homeowner, iw) = best.alpha;
                sol.delta(age, g, homeowner, iw) = best.delta;
            });

            for (int iw = 1; iw < nw; ++iw) {
                const double prev = sol.value(age, g, homeowner, iw - 1);
                if (sol.value(age, g, homeowner, iw) < prev - 1e-9 * (1.0 + std::abs(prev)))
                    sol.diagnostics().monotonicity_violations += 1;
            }
        }
        sol.diagnostics().clamped_below_grid +=
            next_single.clamped_below() + next_couple.clamped_below();
    }
    sol.diagnostics().floor_infeasible_states += floor_infeasible.load();
}

SolutionSet solve_policy(const SolverInputs& in) {
    in.validate();
    SolutionSet sol(in.retire_age, in.terminal_age, in.grid.make_wealth_nodes());
    sol.set_regime_label(in.regime.label);
    const QuadratureRule quad = QuadratureRule::gauss_hermite(in.grid.quadrature_nodes);
    const int T = in.terminal_age;
    const int nw = static_cast<int>(sol.wealth_nodes().size());

    const double terminal_bequest_w =
        std::pow(in.utility.health_decay,
                 in.utility.bequest_weight_growth * static_cast<double>(T - in.retire_age));
    for (int h = 0; h < 2; ++h)
        for (FamilyState g : {FamilyState::single, FamilyState::couple})
            for (int iw = 0; iw < nw; ++iw)
                sol.value(T, g, h == 1, iw) =
                    bequest_utility(sol.wealth_nodes()[static_cast<std::size_t>(iw)], in.utility) *
                    terminal_bequest_w;

    const double phi_single = housing_utility_coefficient(HouseholdKind::single, in.utility);
    const double phi_couple = housing_utility_coefficient(HouseholdKind::couple, in.utility);
    const double grow_single =
        std::pow(in.utility.health_decay, in.utility.housing_weight_growth(HouseholdKind::single));
    const double grow_couple =
        std::pow(in.utility.health_decay, in.utility.housing_weight_growth(HouseholdKind::couple));
    sol.housing_coeff(T, FamilyState::single) = 0.0;
    sol.housing_coeff(T, FamilyState::couple) = 0.0;

    for (int t = T - 1; t >= in.retire_age; --t) {
        bellman_step(t, in, quad, sol);
        const double beta = discount_factor(t, t + 1, in.market.risk_free);
        const double q = in.mortality.survival_prob(t);
        sol.housing_coeff(t, FamilyState::single) =
            phi_single +
            beta * grow_single * q * sol.housing_coeff(t + 1, FamilyState::single);
        sol.housing_coeff(t, FamilyState::couple) =
            phi_couple +
            beta * grow_couple * (q * sol.housing_coeff(t + 1, FamilyState::couple) +
                                  (1.0 - q) * sol.housing_coeff(t + 1, FamilyState::single));
    }
    return sol;
}

HousingDecision optimal_housing(double total_wealth,
                                const std::function<double(double, bool)>& liquid_value,
                                double housing_coeff, const UtilityParams& utility,
                                HouseholdKind d, double house_min) {
    (void)d;  // the coefficient already carries the household scaling
    // Renting is available only below the minimum home value. Housing utility
    // diverges to -infinity as the home value approaches zero, so any
    // affordable home beats a notional zero-value one; the renter's value
    // function exists for households below the bound.
    if (total_wealth < house_min)
        return {0.0, liquid_value(total_wealth, false)};

    const double gamma_h = utility.housing_risk_aversion;
    const double lambda = utility.housing_preference;
    auto owner_value = [&](double home) {
        return liquid_value(total_wealth - home, true) +
               housing_coeff * std::pow(lambda * home, gamma_h);
    };

    const int n_scan = 201;
    double best_home = house_min;
    double best_value = kNegInf;
    const double step = (total_wealth - house_min) / (n_scan - 1);
    for (int i = 0; i < n_scan; ++i) {
        const double home = house_min + step * i;
        const double v = owner_value(home);
        if (v > best_value) {
            best_value = v;
            best_home = home;
        }
    }
    if (step > 0.0)
        golden_max(owner_value, std::max(house_min, best_home - step),
                   std::min(total_wealth, best_home + step), 1.0, best_home, best_value);

    return {best_home, best_value};
}

HousingDecision optimal_housing(double total_wealth, const SolutionSet& sol, FamilyState g,
                                const UtilityParams& utility, double house_min) {
    auto liquid_value = [&](double liquid, bool homeowner) {
        return sol.value_at(sol.retire_age(), g, homeowner, liquid);
    };
    return optimal_housing(total_wealth, liquid_value, sol.housing_coeff(sol.retire_age(), g),
                           utility, kind_of(g), house_min);
}

} // namespace retirement
