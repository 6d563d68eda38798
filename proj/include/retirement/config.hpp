#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retirement/solver.hpp"

namespace retirement {

// Configuration problem with a JSON-pointer-like field path attached.
class config_error : public std::runtime_error {
public:
    config_error(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// Ordered regime documents from a policy parameter file. Later documents may
// reference an earlier one as `base` and override individual fields.
using RegimeMap = std::map<std::string, PolicyRegime>;

RegimeMap load_policy_file(const std::string& path);
RegimeMap parse_policy_json(const std::string& text, const std::string& source_name);

// Full description of one solver run. Defaults reproduce the published 2016
// parameter tables; any override is echoed in output metadata.
struct ScenarioConfig {
    std::string regime = "post2015";
    HouseholdKind household = HouseholdKind::couple;
    bool homeowner = false;
    bool housing_search = false;      // optimize the home allocation at retirement
    double start_wealth = 500'000.0;  // liquid, or total when housing_search is on
    int retire_age = 65;
    int terminal_age = 100;
    bool enforce_minimum_withdrawal = true;

    MarketParams market;
    UtilityParams utility;
    GridSpec grid;
    WithdrawalSchedule withdrawals = WithdrawalSchedule::regulatory_2016();

    // Opening balance of a grandfathered account; defaults to start_wealth.
    std::optional<double> grandfather_wealth;
    // Expected lifetime at retirement; defaults to the life table's value.
    std::optional<double> grandfather_life_expectancy;

#ifdef RETIREMENT_DATA_DIR
    std::string life_table = std::string(RETIREMENT_DATA_DIR) + "/life_table_au.csv";
    std::string policy_file = std::string(RETIREMENT_DATA_DIR) + "/pension_rates.json";
#else
    std::string life_table = "data/life_table_au.csv";
    std::string policy_file = "data/pension_rates.json";
#endif
    std::string output_dir = "out";
    std::uint64_t seed = 20160901;
    int mc_paths = 2000;

    void validate() const;  // throws config_error with a field path

    std::string to_json_text() const;
    static ScenarioConfig from_json_text(const std::string& text);
    static ScenarioConfig load(const std::string& path);

    // FNV-1a hash of the canonical JSON form; stamped on every output file.
    std::uint64_t canonical_hash() const;
};

// Assembles solver inputs from a config plus loaded data, resolving the
// grandfather record for drawdown-tested regimes.
SolverInputs make_solver_inputs(const ScenarioConfig& config, const RegimeMap& regimes,
                                const MortalityTable& mortality);

std::uint64_t fnv1a64(const std::string& text);

const char* to_string(HouseholdKind d);
HouseholdKind household_kind_from_string(const std::string& s);

} // namespace retirement
