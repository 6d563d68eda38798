#include "retirement/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace retirement {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

const char* to_string(HouseholdKind d) {
    return d == HouseholdKind::single ? "single" : "couple";
}

HouseholdKind household_kind_from_string(const std::string& s) {
    if (s == "single")
        return HouseholdKind::single;
    if (s == "couple")
        return HouseholdKind::couple;
    throw config_error("household", "expected 'single' or 'couple', got '" + s + "'");
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

double require_number(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw config_error(path + "." + key, "missing or non-numeric");
    return j[key].get<double>();
}

// Applies the fields present in `j` onto `r`. With `require_all`, every field
// must be present (a full rates document rather than an overlay).
void apply_rates(PensionRates& r, const json& j, const std::string& path, bool require_all) {
    auto set = [&](const json& obj, const std::string& p, const char* key, double& out) {
        if (obj.contains(key)) {
            if (!obj[key].is_number())
                throw config_error(p + "." + key, "must be a number");
            out = obj[key].get<double>();
        } else if (require_all) {
            throw config_error(p + "." + key, "missing");
        }
    };
    set(j, path, "full_pension", r.full_pension);
    if (j.contains("income_test")) {
        const json& it = j["income_test"];
        set(it, path + ".income_test", "threshold", r.income_threshold);
        set(it, path + ".income_test", "taper", r.income_taper);
    } else if (require_all) {
        throw config_error(path + ".income_test", "missing");
    }
    if (j.contains("asset_test")) {
        const json& at = j["asset_test"];
        set(at, path + ".asset_test", "threshold_homeowner", r.asset_threshold_homeowner);
        set(at, path + ".asset_test", "threshold_non_homeowner", r.asset_threshold_non_homeowner);
        set(at, path + ".asset_test", "taper", r.asset_taper);
    } else if (require_all) {
        throw config_error(path + ".asset_test", "missing");
    }
    if (j.contains("deeming")) {
        const json& de = j["deeming"];
        set(de, path + ".deeming", "threshold", r.deeming_threshold);
        set(de, path + ".deeming", "rate_low", r.deeming_rate_low);
        set(de, path + ".deeming", "rate_high", r.deeming_rate_high);
    } else if (require_all) {
        throw config_error(path + ".deeming", "missing");
    }
}

} // namespace

RegimeMap parse_policy_json(const std::string& text, const std::string& source_name) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(source_name, std::string("not valid JSON: ") + e.what());
    }
    if (!doc.contains("regimes") || !doc["regimes"].is_array())
        throw config_error(source_name + ".regimes", "missing regime array");

    RegimeMap out;
    for (std::size_t i = 0; i < doc["regimes"].size(); ++i) {
        const json& entry = doc["regimes"][i];
        const std::string path = source_name + ".regimes[" + std::to_string(i) + "]";
        if (!entry.contains("label") || !entry["label"].is_string())
            throw config_error(path + ".label", "missing");
        PolicyRegime regime;
        regime.label = entry["label"].get<std::string>();

        if (!entry.contains("income_test_mode") || !entry["income_test_mode"].is_string())
            throw config_error(path + ".income_test_mode", "missing");
        const std::string mode = entry["income_test_mode"].get<std::string>();
        if (mode == "deemed")
            regime.income_test_mode = IncomeTestMode::deemed;
        else if (mode == "drawdown_with_deduction")
            regime.income_test_mode = IncomeTestMode::drawdown_with_deduction;
        else
            throw config_error(path + ".income_test_mode", "unknown mode '" + mode + "'");

        bool has_base = entry.contains("base");
        if (has_base) {
            const std::string base = entry["base"].get<std::string>();
            auto it = out.find(base);
            if (it == out.end())
                throw config_error(path + ".base", "unknown base regime '" + base + "'");
            regime.params = it->second.params;
        }

        const char* rates_key = entry.contains("rates") ? "rates"
                                : entry.contains("overrides") ? "overrides"
                                                              : nullptr;
        if (rates_key == nullptr && !has_base)
            throw config_error(path, "regime needs 'rates' or a 'base' to inherit from");
        if (rates_key != nullptr) {
            const json& rates = entry[rates_key];
            const bool require_all = !has_base;
            if (rates.contains("single"))
                apply_rates(regime.params.singles, rates["single"],
                            path + "." + rates_key + ".single", require_all);
            else if (require_all)
                throw config_error(path + "." + rates_key + ".single", "missing");
            if (rates.contains("couple"))
                apply_rates(regime.params.couples, rates["couple"],
                            path + "." + rates_key + ".couple", require_all);
            else if (require_all)
                throw config_error(path + "." + rates_key + ".couple", "missing");
        }

        try {
            regime.params.validate();
        } catch (const std::invalid_argument& e) {
            throw config_error(path, e.what());
        }
        if (!out.emplace(regime.label, std::move(regime)).second)
            throw config_error(path + ".label", "duplicate regime label");
    }
    return out;
}

RegimeMap load_policy_file(const std::string& path) {
    return parse_policy_json(read_file(path), path);
}

namespace {

json to_json(const ScenarioConfig& c) {
    json j;
    j["regime"] = c.regime;
    j["household"] = to_string(c.household);
    j["homeowner"] = c.homeowner;
    j["housing_search"] = c.housing_search;
    j["start_wealth"] = c.start_wealth;
    j["retire_age"] = c.retire_age;
    j["terminal_age"] = c.terminal_age;
    j["enforce_minimum_withdrawal"] = c.enforce_minimum_withdrawal;
    j["market"] = {{"risky_drift", c.market.risky_drift},
                   {"risky_vol", c.market.risky_vol},
                   {"risk_free", c.market.risk_free},
                   {"inflation", c.market.inflation}};
    j["utility"] = {{"risk_aversion_single", c.utility.risk_aversion_single},
                    {"risk_aversion_couple", c.utility.risk_aversion_couple},
                    {"housing_risk_aversion", c.utility.housing_risk_aversion},
                    {"bequest_altruism", c.utility.bequest_altruism},
                    {"bequest_threshold", c.utility.bequest_threshold},
                    {"consumption_floor_single", c.utility.consumption_floor_single},
                    {"consumption_floor_couple", c.utility.consumption_floor_couple},
                    {"health_decay", c.utility.health_decay},
                    {"housing_preference", c.utility.housing_preference},
                    {"scale_single", c.utility.scale_single},
                    {"scale_couple", c.utility.scale_couple},
                    {"bequest_weight_growth", c.utility.bequest_weight_growth},
                    {"housing_weight_growth_single", c.utility.housing_weight_growth_single},
                    {"housing_weight_growth_couple", c.utility.housing_weight_growth_couple}};
    j["grid"] = {{"wealth_min", c.grid.wealth_min},
                 {"wealth_max", c.grid.wealth_max},
                 {"wealth_nodes", c.grid.wealth_nodes},
                 {"control_grid", c.grid.control_grid},
                 {"refine_rounds", c.grid.refine_rounds},
                 {"quadrature_nodes", c.grid.quadrature_nodes}};
    json bands = json::array();
    for (const auto& b : c.withdrawals.bands)
        bands.push_back({{"from_age", b.from_age}, {"rate", b.rate}});
    j["withdrawals"] = bands;
    if (c.grandfather_wealth)
        j["grandfather_wealth"] = *c.grandfather_wealth;
    if (c.grandfather_life_expectancy)
        j["grandfather_life_expectancy"] = *c.grandfather_life_expectancy;
    j["life_table"] = c.life_table;
    j["policy_file"] = c.policy_file;
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    j["mc_paths"] = c.mc_paths;
    return j;
}

const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        "regime",        "household",        "homeowner",
        "housing_search", "start_wealth",    "retire_age",
        "terminal_age",  "enforce_minimum_withdrawal", "market",
        "utility",       "grid",             "withdrawals",
        "grandfather_wealth", "grandfather_life_expectancy", "life_table",
        "policy_file",   "output_dir",       "seed",
        "mc_paths"};
    return keys;
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j[key].get<T>();
        } catch (const json::exception&) {
            throw config_error(key, "wrong type");
        }
    }
}

} // namespace

std::string ScenarioConfig::to_json_text() const {
    return to_json(*this).dump(2) + "\n";
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error("config", std::string("not valid JSON: ") + e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& keys = known_config_keys();
        if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
            throw config_error(it.key(), "unknown configuration key");
    }

    ScenarioConfig c;
    read_if(j, "regime", c.regime);
    if (j.contains("household"))
        c.household = household_kind_from_string(j["household"].get<std::string>());
    read_if(j, "homeowner", c.homeowner);
    read_if(j, "housing_search", c.housing_search);
    read_if(j, "start_wealth", c.start_wealth);
    read_if(j, "retire_age", c.retire_age);
    read_if(j, "terminal_age", c.terminal_age);
    read_if(j, "enforce_minimum_withdrawal", c.enforce_minimum_withdrawal);
    if (j.contains("market")) {
        const json& m = j["market"];
        read_if(m, "risky_drift", c.market.risky_drift);
        read_if(m, "risky_vol", c.market.risky_vol);
        read_if(m, "risk_free", c.market.risk_free);
        read_if(m, "inflation", c.market.inflation);
    }
    if (j.contains("utility")) {
        const json& u = j["utility"];
        read_if(u, "risk_aversion_single", c.utility.risk_aversion_single);
        read_if(u, "risk_aversion_couple", c.utility.risk_aversion_couple);
        read_if(u, "housing_risk_aversion", c.utility.housing_risk_aversion);
        read_if(u, "bequest_altruism", c.utility.bequest_altruism);
        read_if(u, "bequest_threshold", c.utility.bequest_threshold);
        read_if(u, "consumption_floor_single", c.utility.consumption_floor_single);
        read_if(u, "consumption_floor_couple", c.utility.consumption_floor_couple);
        read_if(u, "health_decay", c.utility.health_decay);
        read_if(u, "housing_preference", c.utility.housing_preference);
        read_if(u, "scale_single", c.utility.scale_single);
        read_if(u, "scale_couple", c.utility.scale_couple);
        read_if(u, "bequest_weight_growth", c.utility.bequest_weight_growth);
        read_if(u, "housing_weight_growth_single", c.utility.housing_weight_growth_single);
        read_if(u, "housing_weight_growth_couple", c.utility.housing_weight_growth_couple);
    }
    if (j.contains("grid")) {
        const json& g = j["grid"];
        read_if(g, "wealth_min", c.grid.wealth_min);
        read_if(g, "wealth_max", c.grid.wealth_max);
        read_if(g, "wealth_nodes", c.grid.wealth_nodes);
        read_if(g, "control_grid", c.grid.control_grid);
        read_if(g, "refine_rounds", c.grid.refine_rounds);
        read_if(g, "quadrature_nodes", c.grid.quadrature_nodes);
    }
    if (j.contains("withdrawals")) {
        c.withdrawals.bands.clear();
        for (const json& b : j["withdrawals"])
            c.withdrawals.bands.push_back(
                {b.at("from_age").get<int>(), b.at("rate").get<double>()});
    }
    if (j.contains("grandfather_wealth"))
        c.grandfather_wealth = j["grandfather_wealth"].get<double>();
    if (j.contains("grandfather_life_expectancy"))
        c.grandfather_life_expectancy = j["grandfather_life_expectancy"].get<double>();
    read_if(j, "life_table", c.life_table);
    read_if(j, "policy_file", c.policy_file);
    read_if(j, "output_dir", c.output_dir);
    read_if(j, "seed", c.seed);
    read_if(j, "mc_paths", c.mc_paths);
    return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
    return from_json_text(read_file(path));
}

void ScenarioConfig::validate() const {
    if (regime.empty())
        throw config_error("regime", "empty");
    if (!(start_wealth >= 0.0))
        throw config_error("start_wealth", "must be non-negative");
    if (!(terminal_age > retire_age))
        throw config_error("terminal_age", "must exceed retire_age");
    if (mc_paths < 1)
        throw config_error("mc_paths", "must be positive");
    auto wrap = [](const char* field, auto&& fn) {
        try {
            fn();
        } catch (const std::invalid_argument& e) {
            throw config_error(field, e.what());
        }
    };
    wrap("market", [&] { market.validate(); });
    wrap("utility", [&] { utility.validate(); });
    wrap("grid", [&] { grid.validate(); });
    wrap("withdrawals", [&] { withdrawals.validate(); });
    if (grandfather_wealth && !(*grandfather_wealth >= 0.0))
        throw config_error("grandfather_wealth", "must be non-negative");
    if (grandfather_life_expectancy && !(*grandfather_life_expectancy > 0.0))
        throw config_error("grandfather_life_expectancy", "must be positive");
}

std::uint64_t ScenarioConfig::canonical_hash() const {
    // dump() with default settings sorts object keys, so the hash is stable.
    return fnv1a64(to_json(*this).dump());
}

SolverInputs make_solver_inputs(const ScenarioConfig& config, const RegimeMap& regimes,
                                const MortalityTable& mortality) {
    config.validate();
    auto it = regimes.find(config.regime);
    if (it == regimes.end())
        throw config_error("regime", "not found in policy file: '" + config.regime + "'");

    SolverInputs in;
    in.retire_age = config.retire_age;
    in.terminal_age = config.terminal_age;
    in.regime = it->second;
    in.utility = config.utility;
    in.market = config.market;
    in.mortality = mortality;
    in.withdrawals = config.withdrawals;
    in.grid = config.grid;
    in.enforce_minimum_withdrawal = config.enforce_minimum_withdrawal;
    if (in.regime.income_test_mode == IncomeTestMode::drawdown_with_deduction) {
        GrandfatherRecord gf;
        gf.opening_balance = config.grandfather_wealth.value_or(config.start_wealth);
        // The account pays until the last household member dies, so a couple's
        // deduction divides by the household (not individual) life expectancy.
        gf.life_expectancy = config.grandfather_life_expectancy.value_or(
            config.household == HouseholdKind::couple
                ? household_life_expectancy(mortality, config.retire_age)
                : mortality.life_expectancy(config.retire_age));
        gf.opening_age = config.retire_age;
        gf.inflation = config.market.inflation;
        in.grandfather = gf;
    }
    return in;
}

} // namespace retirement
