#pragma once

#include <map>
#include <string>
#include <vector>

#include "retirement/config.hpp"
#include "retirement/paths.hpp"

namespace retirement {

// Config plus the data files it references, loaded once.
struct Workspace {
    ScenarioConfig config;
    RegimeMap regimes;
    MortalityTable mortality;
};

Workspace load_workspace(const ScenarioConfig& config);

// Re-checks solver invariants before anything is exported: controls within
// bounds and the value function monotone in wealth. Throws on violation.
void validate_solution(const SolutionSet& sol, const SolverInputs& in);

// Delimited solution file with a '#'-prefixed metadata preamble.
void write_solution(const std::string& path, const SolutionSet& sol,
                    const std::map<std::string, std::string>& metadata);
SolutionSet read_solution(const std::string& path, std::map<std::string, std::string>* metadata);

// Solves the configured scenario and writes the solution plus a config echo
// under <output_dir>/<regime>/. Idempotent: identical configs produce
// byte-identical files. Returns the paths written.
std::vector<std::string> run_solve(const ScenarioConfig& config);

// Emits the figure datasets (1-2 drawdown/consumption surfaces, 3 lifetime
// comparison, 4 pension curves, 5-8 risky-allocation surfaces, 9 housing
// allocation). Returns the files written; an empty figure list is a no-op.
std::vector<std::string> run_figures(const ScenarioConfig& config,
                                     const std::vector<int>& figure_ids);

} // namespace retirement
