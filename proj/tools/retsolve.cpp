#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "retirement/figures.hpp"

using namespace retirement;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

ScenarioConfig load_or_default(const std::string& config_path) {
    if (config_path.empty())
        return ScenarioConfig{};
    return ScenarioConfig::load(config_path);
}

int cmd_solve(const std::string& config_path, const std::string& regime,
              const std::string& out_dir) {
    ScenarioConfig config = load_or_default(config_path);
    if (!regime.empty())
        config.regime = regime;
    if (!out_dir.empty())
        config.output_dir = out_dir;
    config.validate();
    for (const std::string& path : run_solve(config))
        std::cout << path << "\n";
    return kExitOk;
}

int cmd_figures(const std::string& config_path, bool all, std::vector<int> figs,
                const std::string& out_dir) {
    ScenarioConfig config = load_or_default(config_path);
    if (!out_dir.empty())
        config.output_dir = out_dir;
    config.validate();
    if (all)
        figs = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    if (figs.empty()) {
        std::cerr << "figures: nothing requested; pass --all or --fig <n>\n";
        return kExitValidation;
    }
    for (const std::string& path : run_figures(config, figs))
        std::cout << path << "\n";
    return kExitOk;
}

// A policy file is JSON; a life table is CSV. Sniff by extension, fall back
// to the first non-space byte.
bool looks_like_json(const std::string& path) {
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
        return true;
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0)
        return false;
    std::ifstream in(path);
    char c = 0;
    while (in.get(c) && (c == ' ' || c == '\n' || c == '\r' || c == '\t')) {
    }
    return c == '{' || c == '[';
}

int cmd_validate(const std::vector<std::string>& files) {
    int failures = 0;
    for (const std::string& path : files) {
        try {
            if (looks_like_json(path)) {
                RegimeMap regimes = load_policy_file(path);
                std::cout << path << ": ok (" << regimes.size() << " regimes)\n";
            } else {
                MortalityTable table = MortalityTable::load_csv(path);
                std::cout << path << ": ok (ages " << table.first_age << "-"
                          << table.last_age() - 1 << ")\n";
            }
        } catch (const std::exception& e) {
            std::cout << path << ": INVALID: " << e.what() << "\n";
            ++failures;
        }
    }
    return failures == 0 ? kExitOk : kExitValidation;
}

int cmd_pension_query(const std::string& policy_file, double wealth, const std::string& kind_s,
                      bool homeowner, const std::string& regime_label,
                      std::optional<double> drawdown_rate, int age,
                      const std::string& life_table) {
    RegimeMap regimes = load_policy_file(policy_file);
    auto it = regimes.find(regime_label);
    if (it == regimes.end()) {
        std::cerr << "unknown regime '" << regime_label << "'\n";
        return kExitValidation;
    }
    const PolicyRegime& regime = it->second;
    HouseholdKind kind = household_kind_from_string(kind_s);

    double drawdown = 0.0;
    std::optional<GrandfatherRecord> gf;
    if (regime.income_test_mode == IncomeTestMode::drawdown_with_deduction) {
        if (!drawdown_rate) {
            std::cerr << "regime '" << regime_label << "' assesses income on drawdown; pass "
                      << "--drawdown <rate>\n";
            return kExitValidation;
        }
        MortalityTable mortality = MortalityTable::load_csv(life_table);
        MarketParams market;
        const double e = kind == HouseholdKind::couple
                             ? household_life_expectancy(mortality, age)
                             : mortality.life_expectancy(age);
        gf = GrandfatherRecord{wealth, e, age, market.inflation};
        drawdown = *drawdown_rate * wealth;
    } else if (drawdown_rate) {
        drawdown = *drawdown_rate * wealth;
    }

    double p = age_pension(wealth, drawdown, kind, homeowner, regime, gf, age);
    std::printf("regime:          %s\n", regime.label.c_str());
    std::printf("household:       %s, %s\n", to_string(kind),
                homeowner ? "homeowner" : "non-homeowner");
    std::printf("wealth:          %.2f\n", wealth);
    std::printf("annual pension:  %.2f\n", p);
    std::printf("full boundary:   %.2f\n", full_pension_boundary(kind, homeowner, regime));
    std::printf("zero cutoff:     %.2f\n", zero_pension_cutoff(kind, homeowner, regime));
    if (regime.income_test_mode == IncomeTestMode::deemed) {
        std::printf("deemed income:   %.2f\n", deemed_income(wealth, kind, regime.params));
        std::printf("test crossover:  %.2f\n", binding_test_crossover(kind, homeowner, regime));
    } else if (gf) {
        std::printf("deduction:       %.2f\n", income_test_deduction(*gf, age));
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Retirement decumulation solver"};
    app.require_subcommand(1);

    std::string config_path, regime, out_dir;
    auto* solve = app.add_subcommand("solve", "Solve one scenario and write the policy surfaces");
    solve->add_option("--config", config_path, "Scenario config JSON (defaults used if omitted)");
    solve->add_option("--regime", regime, "Override the configured policy regime")
        ->check(CLI::IsMember({"pre2015", "post2015", "post2015r"}));
    solve->add_option("--out", out_dir, "Override the output directory");

    bool all_figs = false;
    std::vector<int> figs;
    std::string fig_config, fig_out;
    auto* figures = app.add_subcommand("figures", "Emit figure datasets");
    figures->add_option("--config", fig_config, "Scenario config JSON");
    figures->add_flag("--all", all_figs, "Emit every figure dataset");
    figures->add_option("--fig", figs, "Figure number (repeatable)")->check(CLI::Range(1, 9));
    figures->add_option("--out", fig_out, "Override the output directory");

    std::vector<std::string> validate_files;
    auto* validate = app.add_subcommand("validate", "Validate policy or life-table data files");
    validate->add_option("files", validate_files, "Files to check")->required();

    double q_wealth = 0.0;
    std::string q_kind = "couple", q_regime = "post2015";
    std::string q_policy = std::string(RETIREMENT_DATA_DIR) + "/pension_rates.json";
    std::string q_life = std::string(RETIREMENT_DATA_DIR) + "/life_table_au.csv";
    bool q_homeowner = false;
    int q_age = 65;
    std::optional<double> q_drawdown;
    double q_drawdown_raw = -1.0;
    auto* query = app.add_subcommand("pension-query", "Evaluate the pension at one wealth point");
    query->add_option("--wealth", q_wealth, "Assessable wealth")->required();
    query->add_option("--kind", q_kind, "single or couple")
        ->check(CLI::IsMember({"single", "couple"}));
    query->add_flag("--homeowner", q_homeowner, "Household owns its home");
    query->add_option("--regime", q_regime, "Policy regime label");
    query->add_option("--drawdown", q_drawdown_raw, "Annual drawdown rate of wealth");
    query->add_option("--age", q_age, "Age at assessment");
    query->add_option("--policy-file", q_policy, "Policy parameter file");
    query->add_option("--life-table", q_life, "Life table (drawdown-tested regimes)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return cmd_solve(config_path, regime, out_dir);
        if (figures->parsed())
            return cmd_figures(fig_config, all_figs, figs, fig_out);
        if (validate->parsed())
            return cmd_validate(validate_files);
        if (query->parsed()) {
            if (q_drawdown_raw >= 0.0)
                q_drawdown = q_drawdown_raw;
            return cmd_pension_query(q_policy, q_wealth, q_kind, q_homeowner, q_regime,
                                     q_drawdown, q_age, q_life);
        }
    } catch (const config_error& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
