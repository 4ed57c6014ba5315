#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "defres/json_io.hpp"
#include "defres/potential.hpp"
#include "defres/sweep.hpp"

namespace defres {

enum class RunMode { bands, defect, resonance, bound, edge, sweep };

std::string to_string(RunMode m);
RunMode parse_run_mode(const std::string& s);  ///< throws ConfigError

struct Tolerances {
    double ode = 1e-12;
    double energy = 1e-13;  ///< defect root polish width
    double step = 1e-13;
    double residual = 1e-11;
    int max_iter = 200;
    int newton_after = 50;
};

struct RunConfig {
    Potential potential;
    RunMode mode = RunMode::bands;
    double z_min = -40.0;
    double z_max = 60.0;
    int n_samples = 401;
    std::optional<std::pair<double, double>> gap;  ///< restrict the defect search to this gap
    int mode_index = 0;                            ///< among modes admissible for the solve kind
    std::optional<double> M;
    std::vector<double> M_list;
    std::optional<SolveKind> sweep_kind;  ///< default: edge for half-line, else by the sign of E
    bool force_general = false;           ///< "solver": "general"
    Tolerances tol;
    int search_grid = 400;
    int samples_per_unit = 64;
    double profile_extent = 0.0;  ///< 0: rho_ceil + 8
    int state_samples = 801;
    double state_extent = 0.0;  ///< 0: M + 3
    std::string prefix = "run";

    Json canonical;    ///< normalized config with all defaults filled in
    std::string hash;  ///< FNV-1a of the canonical text
};

/// Parses and validates; errors name the offending field path.
RunConfig parse_config(const Json& j);
RunConfig load_config(const std::string& path);

/// Mode-specific checks (M present and > rho, M_list strictly increasing, ...).
void validate_for_mode(const RunConfig& c);

/// Rebuilds the canonical form and hash after programmatic edits.
void finalize(RunConfig& c);

Json to_json(const Potential& p);

}  // namespace defres
