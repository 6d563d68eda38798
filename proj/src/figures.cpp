#include "retirement/figures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace retirement {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string hash_hex(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

FamilyState state_of(HouseholdKind kind) {
    return kind == HouseholdKind::couple ? FamilyState::couple : FamilyState::single;
}

const char* family_name(FamilyState g) {
    return g == FamilyState::couple ? "couple" : "single";
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::map<std::string, std::string>& metadata)
        : path_(path), out_(path) {
        if (!out_)
            throw std::runtime_error("cannot write: " + path);
        for (const auto& [k, v] : metadata)
            out_ << "# " << k << ": " << v << "\n";
    }
    void header(const std::string& columns) { out_ << columns << "\n"; }
    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i)
            out_ << (i ? "," : "") << fields[i];
        out_ << "\n";
    }
    void comment(const std::string& line) { out_ << "# " << line << "\n"; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream out_;
};

std::map<std::string, std::string> base_metadata(const ScenarioConfig& config) {
    return {{"generator", "retsolve v1"},
            {"config_hash", hash_hex(config.canonical_hash())}};
}

} // namespace

Workspace load_workspace(const ScenarioConfig& config) {
    config.validate();
    Workspace ws;
    ws.config = config;
    ws.regimes = load_policy_file(config.policy_file);
    ws.mortality = MortalityTable::load_csv(config.life_table);
    return ws;
}

void validate_solution(const SolutionSet& sol, const SolverInputs& in) {
    const int nw = static_cast<int>(sol.wealth_nodes().size());
    for (int t = in.retire_age; t < in.terminal_age; ++t) {
        const double lo = in.enforce_minimum_withdrawal ? in.withdrawals.min_rate(t) : 0.0;
        for (FamilyState g : {FamilyState::single, FamilyState::couple}) {
            for (int h = 0; h < 2; ++h) {
                for (int iw = 0; iw < nw; ++iw) {
                    const double a = sol.alpha(t, g, h == 1, iw);
                    const double d = sol.delta(t, g, h == 1, iw);
                    if (!(a >= lo - 1e-9 && a <= 1.0 + 1e-9))
                        throw std::runtime_error("solution export: alpha out of bounds at age " +
                                                 std::to_string(t));
                    if (!(d >= -1e-9 && d <= 1.0 + 1e-9))
                        throw std::runtime_error("solution export: delta out of bounds at age " +
                                                 std::to_string(t));
                    if (iw > 0) {
                        const double prev = sol.value(t, g, h == 1, iw - 1);
                        if (sol.value(t, g, h == 1, iw) < prev - 1e-8 * (1.0 + std::abs(prev)))
                            throw std::runtime_error(
                                "solution export: value not monotone in wealth at age " +
                                std::to_string(t));
                    }
                }
            }
        }
    }
}

void write_solution(const std::string& path, const SolutionSet& sol,
                    const std::map<std::string, std::string>& metadata) {
    auto meta = metadata;
    meta["format"] = "retirement-solution v1";
    meta["regime"] = sol.regime_label();
    meta["retire_age"] = std::to_string(sol.retire_age());
    meta["terminal_age"] = std::to_string(sol.terminal_age());
    meta["wealth_nodes"] = std::to_string(sol.wealth_nodes().size());
    CsvWriter w(path, meta);
    w.header("age,family,homeowner,wealth,value,alpha,delta");
    const int nw = static_cast<int>(sol.wealth_nodes().size());
    for (int t = sol.retire_age(); t <= sol.terminal_age(); ++t)
        for (FamilyState g : {FamilyState::single, FamilyState::couple})
            for (int h = 0; h < 2; ++h)
                for (int iw = 0; iw < nw; ++iw)
                    w.row({std::to_string(t), family_name(g), std::to_string(h),
                           fmt(sol.wealth_nodes()[static_cast<std::size_t>(iw)]),
                           fmt(sol.value(t, g, h == 1, iw)), fmt(sol.alpha(t, g, h == 1, iw)),
                           fmt(sol.delta(t, g, h == 1, iw))});
    w.comment("section: housing_coeff");
    w.comment("columns: age,family,phi");
    for (int t = sol.retire_age(); t <= sol.terminal_age(); ++t)
        for (FamilyState g : {FamilyState::single, FamilyState::couple})
            w.row({std::to_string(t), family_name(g), fmt(sol.housing_coeff(t, g))});
}

SolutionSet read_solution(const std::string& path, std::map<std::string, std::string>* metadata) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open solution: " + path);

    std::map<std::string, std::string> meta;
    std::string line;
    std::vector<std::string> rows;
    bool housing_section = false;
    std::vector<std::string> housing_rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (line[0] == '#') {
            auto colon = line.find(": ");
            if (colon != std::string::npos)
                meta[line.substr(2, colon - 2)] = line.substr(colon + 2);
            if (line.find("section: housing_coeff") != std::string::npos)
                housing_section = true;
            continue;
        }
        if (line.rfind("age,", 0) == 0)
            continue;  // column header
        (housing_section ? housing_rows : rows).push_back(line);
    }

    const int t0 = std::stoi(meta.at("retire_age"));
    const int T = std::stoi(meta.at("terminal_age"));
    const std::size_t nw = static_cast<std::size_t>(std::stoul(meta.at("wealth_nodes")));

    std::vector<double> nodes(nw, 0.0);
    SolutionSet sol;
    {
        // First pass collects the wealth grid from the initial block of rows.
        for (std::size_t i = 0; i < nw && i < rows.size(); ++i) {
            std::stringstream ss(rows[i]);
            std::string f;
            for (int skip = 0; skip < 3; ++skip)
                std::getline(ss, f, ',');
            std::getline(ss, f, ',');
            nodes[i] = std::stod(f);
        }
        sol = SolutionSet(t0, T, nodes);
        sol.set_regime_label(meta.at("regime"));
    }

    for (const std::string& r : rows) {
        std::stringstream ss(r);
        std::string f;
        std::getline(ss, f, ',');
        int age = std::stoi(f);
        std::getline(ss, f, ',');
        FamilyState g = f == "couple" ? FamilyState::couple : FamilyState::single;
        std::getline(ss, f, ',');
        bool homeowner = f == "1";
        std::getline(ss, f, ',');
        double wealth = std::stod(f);
        auto it = std::lower_bound(nodes.begin(), nodes.end(), wealth * (1.0 - 1e-12));
        int iw = static_cast<int>(it - nodes.begin());
        std::getline(ss, f, ',');
        sol.value(age, g, homeowner, iw) = std::stod(f);
        std::getline(ss, f, ',');
        sol.alpha(age, g, homeowner, iw) = std::stod(f);
        std::getline(ss, f, ',');
        sol.delta(age, g, homeowner, iw) = std::stod(f);
    }
    for (const std::string& r : housing_rows) {
        std::stringstream ss(r);
        std::string f;
        std::getline(ss, f, ',');
        int age = std::stoi(f);
        std::getline(ss, f, ',');
        FamilyState g = f == "couple" ? FamilyState::couple : FamilyState::single;
        std::getline(ss, f, ',');
        sol.housing_coeff(age, g) = std::stod(f);
    }
    if (metadata)
        *metadata = meta;
    return sol;
}

namespace {

// Caches full solves across figure writers within one invocation.
class SolveCache {
public:
    SolveCache(const Workspace& ws) : ws_(ws) {}

    // A grandfather balance is only meaningful for drawdown-tested regimes;
    // the household kind sets the deduction's life expectancy there.
    const SolutionSet& get(const std::string& regime, bool enforce_min, HouseholdKind kind,
                           std::optional<double> grandfather_wealth = std::nullopt) {
        std::string key = regime + (enforce_min ? "|min" : "|free");
        key += std::string("|") + to_string(kind);
        if (grandfather_wealth)
            key += "|gf=" + fmt(*grandfather_wealth);
        auto it = cache_.find(key);
        if (it != cache_.end())
            return it->second;
        SolverInputs in = inputs(regime, enforce_min, kind, grandfather_wealth);
        SolutionSet sol = solve_policy(in);
        validate_solution(sol, in);
        return cache_.emplace(key, std::move(sol)).first->second;
    }

    SolverInputs inputs(const std::string& regime, bool enforce_min, HouseholdKind kind,
                        std::optional<double> grandfather_wealth = std::nullopt) const {
        ScenarioConfig c = ws_.config;
        c.regime = regime;
        c.enforce_minimum_withdrawal = enforce_min;
        c.household = kind;
        if (grandfather_wealth)
            c.grandfather_wealth = grandfather_wealth;
        return make_solver_inputs(c, ws_.regimes, ws_.mortality);
    }

    GrandfatherFamily pre2015_family(const std::string& regime, bool enforce_min,
                                     HouseholdKind kind, double balance_min, double balance_max,
                                     int n) {
        std::vector<double> balances(static_cast<std::size_t>(n));
        const double lmin = std::log(balance_min), lmax = std::log(balance_max);
        for (int i = 0; i < n; ++i)
            balances[static_cast<std::size_t>(i)] = std::exp(lmin + (lmax - lmin) * i / (n - 1));
        std::vector<SolutionSet> sols;
        sols.reserve(balances.size());
        for (double b : balances)
            sols.push_back(get(regime, enforce_min, kind, b));
        return GrandfatherFamily(std::move(balances), std::move(sols));
    }

    const Workspace& workspace() const { return ws_; }

private:
    const Workspace& ws_;
    std::map<std::string, SolutionSet> cache_;
};

const std::vector<std::string> kAllRegimes = {"pre2015", "post2015", "post2015r"};

std::vector<int> surface_ages(const ScenarioConfig& c) {
    std::vector<int> ages;
    for (int t = c.retire_age; t < c.terminal_age; t += 5)
        ages.push_back(t);
    return ages;
}

// Figures 1 (couple) and 2 (single): drawdown and consumption over wealth by
// age for the three regimes, non-homeowner households.
void write_policy_surfaces(int fig_id, HouseholdKind kind, SolveCache& cache,
                           const fs::path& outdir, std::vector<std::string>& written) {
    const Workspace& ws = cache.workspace();
    const FamilyState g = state_of(kind);
    for (const std::string& regime : kAllRegimes) {
        const SolutionSet& sol = cache.get(regime, true, kind);
        const SolverInputs in = cache.inputs(regime, true, kind);
        auto meta = base_metadata(ws.config);
        meta["figure"] = std::to_string(fig_id);
        meta["household"] = to_string(kind);
        meta["homeowner"] = "0";
        meta["regime"] = regime;
        std::string path =
            (outdir / ("fig" + std::to_string(fig_id) + "_" + to_string(kind) + "_" + regime +
                       ".csv")).string();
        CsvWriter w(path, meta);
        w.header("age,wealth,alpha,drawdown,pension,consumption,delta");
        for (int age : surface_ages(ws.config)) {
            for (std::size_t i = 0; i < sol.wealth_nodes().size(); ++i) {
                const int iw = static_cast<int>(i);
                const double wealth = sol.wealth_nodes()[i];
                double a = sol.alpha(age, g, false, iw);
                double dd = a * wealth;
                double p = age_pension(wealth, dd, kind, false, in.regime, in.grandfather, age);
                w.row({std::to_string(age), fmt(wealth, "%.10g"), fmt(a, "%.10g"),
                       fmt(dd, "%.10g"), fmt(p, "%.10g"), fmt(dd + p, "%.10g"),
                       fmt(sol.delta(age, g, false, iw), "%.10g")});
            }
        }
        written.push_back(path);
    }
}

void write_lifetime_comparison(SolveCache& cache, const fs::path& outdir,
                               std::vector<std::string>& written) {
    const Workspace& ws = cache.workspace();
    const double start = 1'000'000.0;
    for (HouseholdKind kind : {HouseholdKind::single, HouseholdKind::couple}) {
        for (const std::string& regime : kAllRegimes) {
            for (bool constrained : {true, false}) {
                std::optional<double> gf;
                if (regime == "pre2015")
                    gf = start;  // surfaces are per starting wealth under the old rules
                const SolutionSet& sol = cache.get(regime, constrained, kind, gf);
                SolverInputs in = cache.inputs(regime, constrained, kind, gf);
                LifetimePath path = deterministic_path(start, in, sol, kind, false);
                LifetimePath median = deterministic_path(start, in, sol, kind, false, true);

                auto meta = base_metadata(ws.config);
                meta["figure"] = "3";
                meta["household"] = to_string(kind);
                meta["regime"] = regime;
                meta["constrained"] = constrained ? "1" : "0";
                meta["start_wealth"] = fmt(start, "%.10g");
                meta["return_convention"] =
                    "wealth columns use the arithmetic expected gross return; _median columns "
                    "use the median gross return";
                std::string name = "fig3_" + std::string(to_string(kind)) + "_" + regime +
                                   (constrained ? "" : "_unconstrained") + ".csv";
                CsvWriter w((outdir / name).string(), meta);
                w.header(
                    "age,wealth,drawdown,pension,consumption,risky_share,"
                    "wealth_median,consumption_median");
                for (std::size_t i = 0; i < path.size(); ++i)
                    w.row({std::to_string(path[i].age), fmt(path[i].wealth, "%.10g"),
                           fmt(path[i].drawdown, "%.10g"), fmt(path[i].pension, "%.10g"),
                           fmt(path[i].consumption, "%.10g"), fmt(path[i].risky_share, "%.10g"),
                           fmt(median[i].wealth, "%.10g"), fmt(median[i].consumption, "%.10g")});
                written.push_back(w.path());

                if (constrained) {
                    EnsembleSummary mc = monte_carlo_paths(start, in, sol, kind, false,
                                                           ws.config.mc_paths, ws.config.seed);
                    auto mc_meta = base_metadata(ws.config);
                    mc_meta["figure"] = "3 (monte carlo companion)";
                    mc_meta["household"] = to_string(kind);
                    mc_meta["regime"] = regime;
                    mc_meta["paths"] = std::to_string(ws.config.mc_paths);
                    mc_meta["seed"] = std::to_string(ws.config.seed);
                    mc_meta["quantiles"] = "5,25,50,75,95";
                    CsvWriter wq((outdir / ("fig3mc_" + std::string(to_string(kind)) + "_" +
                                            regime + ".csv")).string(),
                                 mc_meta);
                    wq.header(
                        "age,alive,wealth_q5,wealth_q25,wealth_q50,wealth_q75,wealth_q95,"
                        "consumption_q5,consumption_q25,consumption_q50,consumption_q75,"
                        "consumption_q95,pension_q50");
                    for (std::size_t i = 0; i < mc.ages.size(); ++i) {
                        std::vector<std::string> row{std::to_string(mc.ages[i]),
                                                     std::to_string(mc.alive_paths[i])};
                        for (double q : mc.wealth[i])
                            row.push_back(fmt(q, "%.10g"));
                        for (double q : mc.consumption[i])
                            row.push_back(fmt(q, "%.10g"));
                        row.push_back(fmt(mc.pension[i][2], "%.10g"));
                        wq.row(row);
                    }
                    written.push_back(wq.path());
                }
            }
        }
    }
}

void write_pension_curves(SolveCache& cache, const fs::path& outdir,
                          std::vector<std::string>& written) {
    const Workspace& ws = cache.workspace();
    const double e0 = ws.mortality.life_expectancy(ws.config.retire_age);
    for (HouseholdKind kind : {HouseholdKind::single, HouseholdKind::couple}) {
        std::vector<std::vector<PensionCurvePoint>> curves;
        for (const std::string& regime : kAllRegimes)
            curves.push_back(pension_curve(ws.regimes.at(regime), kind, false, 0.05,
                                           ws.config.retire_age, e0, ws.config.market.inflation,
                                           1'200'000.0, 1201));
        auto meta = base_metadata(ws.config);
        meta["figure"] = "4";
        meta["household"] = to_string(kind);
        meta["homeowner"] = "0";
        meta["drawdown_rate"] = "0.05";
        CsvWriter w((outdir / ("fig4_" + std::string(to_string(kind)) + ".csv")).string(), meta);
        w.header("wealth,pension_pre2015,pension_post2015,pension_post2015r");
        for (std::size_t i = 0; i < curves[0].size(); ++i)
            w.row({fmt(curves[0][i].wealth, "%.10g"), fmt(curves[0][i].pension, "%.10g"),
                   fmt(curves[1][i].pension, "%.10g"), fmt(curves[2][i].pension, "%.10g")});
        written.push_back(w.path());
    }
}

// Figures 5-8: risky allocation surfaces, non-homeowner households.
void write_risky_surfaces(SolveCache& cache, const fs::path& outdir,
                          std::vector<std::string>& written, const std::set<int>& wanted) {
    struct Spec {
        int fig;
        HouseholdKind kind;
        std::string regime;
    };
    const std::vector<Spec> specs = {{5, HouseholdKind::couple, "post2015"},
                                     {6, HouseholdKind::couple, "pre2015"},
                                     {7, HouseholdKind::single, "post2015"},
                                     {8, HouseholdKind::single, "pre2015"}};
    const Workspace& ws = cache.workspace();
    for (const Spec& s : specs) {
        if (!wanted.count(s.fig))
            continue;
        std::optional<double> gf;
        if (s.regime == "pre2015")
            gf = ws.config.grandfather_wealth.value_or(ws.config.start_wealth);
        const SolutionSet& sol = cache.get(s.regime, true, s.kind, gf);
        const PolicyRegime& regime = ws.regimes.at(s.regime);

        auto meta = base_metadata(ws.config);
        meta["figure"] = std::to_string(s.fig);
        meta["household"] = to_string(s.kind);
        meta["homeowner"] = "0";
        meta["regime"] = s.regime;
        meta["full_pension_boundary"] = fmt(full_pension_boundary(s.kind, false, regime), "%.10g");
        meta["zero_pension_cutoff"] = fmt(zero_pension_cutoff(s.kind, false, regime), "%.10g");
        if (regime.income_test_mode == IncomeTestMode::deemed)
            meta["binding_test_crossover"] =
                fmt(binding_test_crossover(s.kind, false, regime), "%.10g");
        CsvWriter w((outdir / ("fig" + std::to_string(s.fig) + "_" + to_string(s.kind) + "_" +
                               s.regime + ".csv")).string(),
                    meta);
        w.header("age,wealth,delta");
        const FamilyState g = state_of(s.kind);
        for (int age = ws.config.retire_age; age < ws.config.terminal_age; ++age)
            for (std::size_t iw = 0; iw < sol.wealth_nodes().size(); ++iw)
                w.row({std::to_string(age), fmt(sol.wealth_nodes()[iw], "%.10g"),
                       fmt(sol.delta(age, g, false, static_cast<int>(iw)), "%.10g")});
        written.push_back(w.path());
    }
}

void write_housing_curves(SolveCache& cache, const fs::path& outdir,
                          std::vector<std::string>& written) {
    const Workspace& ws = cache.workspace();
    const double sweep_min = 50'000.0, sweep_max = 2'500'000.0, step = 10'000.0;
    for (HouseholdKind kind : {HouseholdKind::single, HouseholdKind::couple}) {
        const FamilyState g = state_of(kind);
        const SolutionSet& post = cache.get("post2015", true, kind);
        GrandfatherFamily pre =
            cache.pre2015_family("pre2015", true, kind, 30'000.0, sweep_max, 12);
        auto pre_value = [&](double liquid, bool homeowner) {
            return pre.value_at(liquid, g, homeowner);
        };
        auto meta = base_metadata(ws.config);
        meta["figure"] = "9";
        meta["household"] = to_string(kind);
        CsvWriter w((outdir / ("fig9_" + std::string(to_string(kind)) + ".csv")).string(), meta);
        w.header("total_wealth,home_pre2015,home_post2015");
        for (double total = sweep_min; total <= sweep_max + 1e-9; total += step) {
            HousingDecision hp = optimal_housing(total, pre_value, pre.housing_coeff(g),
                                                 ws.config.utility, kind);
            HousingDecision hq = optimal_housing(total, post, g, ws.config.utility);
            w.row({fmt(total, "%.10g"), fmt(hp.home_value, "%.10g"),
                   fmt(hq.home_value, "%.10g")});
        }
        written.push_back(w.path());
    }
}

} // namespace

std::vector<std::string> run_solve(const ScenarioConfig& config) {
    Workspace ws = load_workspace(config);
    SolverInputs in = make_solver_inputs(config, ws.regimes, ws.mortality);
    SolutionSet sol = solve_policy(in);
    validate_solution(sol, in);

    fs::path dir = fs::path(config.output_dir) / config.regime;
    fs::create_directories(dir);

    auto meta = base_metadata(config);
    meta["grid"] = std::to_string(config.grid.wealth_nodes) + " log nodes [" +
                   fmt(config.grid.wealth_min, "%.10g") + ", " +
                   fmt(config.grid.wealth_max, "%.10g") + "], control grid " +
                   std::to_string(config.grid.control_grid) + ", refine rounds " +
                   std::to_string(config.grid.refine_rounds) + ", quadrature " +
                   std::to_string(config.grid.quadrature_nodes);
    meta["floor_infeasible_states"] = std::to_string(sol.diagnostics().floor_infeasible_states);

    std::vector<std::string> written;
    std::string sol_path = (dir / "solution.csv").string();
    write_solution(sol_path, sol, meta);
    written.push_back(sol_path);

    std::string cfg_path = (dir / "config.json").string();
    std::ofstream cfg(cfg_path);
    if (!cfg)
        throw std::runtime_error("cannot write: " + cfg_path);
    cfg << config.to_json_text();
    written.push_back(cfg_path);
    return written;
}

std::vector<std::string> run_figures(const ScenarioConfig& config,
                                     const std::vector<int>& figure_ids) {
    std::vector<std::string> written;
    if (figure_ids.empty())
        return written;  // explicit no-op
    std::set<int> wanted(figure_ids.begin(), figure_ids.end());
    for (int f : wanted)
        if (f < 1 || f > 9)
            throw config_error("figures", "figure id out of range: " + std::to_string(f));

    Workspace ws = load_workspace(config);
    SolveCache cache(ws);
    fs::path outdir(config.output_dir);
    fs::create_directories(outdir);

    if (wanted.count(1))
        write_policy_surfaces(1, HouseholdKind::couple, cache, outdir, written);
    if (wanted.count(2))
        write_policy_surfaces(2, HouseholdKind::single, cache, outdir, written);
    if (wanted.count(3))
        write_lifetime_comparison(cache, outdir, written);
    if (wanted.count(4))
        write_pension_curves(cache, outdir, written);
    write_risky_surfaces(cache, outdir, written, wanted);
    if (wanted.count(9))
        write_housing_curves(cache, outdir, written);
    return written;
}

} // namespace retirement
