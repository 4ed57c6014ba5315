#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "defres/defect.hpp"
#include "defres/fit.hpp"
#include "defres/resonance.hpp"

namespace defres {

enum class SolveKind { resonance, bound, edge };

std::string to_string(SolveKind k);

/// Dispatches a defect mode to the matching truncation solver: parity modes
/// to solve_parity / solve_bound_negative, others (or `force_general`) to
/// solve_general, half-line modes to solve_edge.
ResonanceResult solve_mode(const Potential& p, const DefectMode& mode, SolveKind kind, double M,
                           const SolveOptions& opts = {}, bool force_general = false);

/// Least-squares slope of log(value) against M.  Needs >= 3 points, all
/// values > 0; throws ConfigError otherwise.
LineFit fit_rate(const std::vector<std::pair<double, double>>& points);

struct SweepRecord {
    double M = 0.0;
    ResonanceResult result;
    double err_vs_E = 0.0;     ///< |z* - E|
    double err_vs_asym = 0.0;  ///< |z* - z1|
    double k_fit = 0.0;        ///< -1/2 slope of log|z* - E| from the previous M (nan for the first)
    bool above_noise_floor = true;
};

struct RateFit {
    std::string quantity;
    double target = 0.0;
    std::optional<LineFit> fit;  ///< empty when fewer than 3 usable points
    double rel_error = 0.0;      ///< |slope - target| / |target|
};

struct SweepSummary {
    double E = 0.0;
    double k = 0.0;
    SolveKind kind = SolveKind::resonance;
    bool general = false;
    std::vector<SweepRecord> records;
    double noise_floor = 0.0;               ///< 100 eps |E|
    std::optional<double> noise_floor_M;    ///< first M below the floor
    std::optional<double> ball_entry_M;     ///< smallest M from which every root lies in its ball
    RateFit err_vs_E;     ///< target -2k
    RateFit err_vs_asym;  ///< target -4k
    RateFit theta_E;      ///< target -k
    RateFit dtheta_E;     ///< target +k (+2k for the Jacobian determinant of the general solver)
};

/// Solves at every M (in parallel up to `threads`) and fits the rates.
SweepSummary run_sweep(const Potential& p, const DefectMode& mode, SolveKind kind, const std::vector<double>& Ms,
                       const SolveOptions& opts = {}, int threads = 1, bool force_general = false);

}  // namespace defres
