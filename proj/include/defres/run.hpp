#pragma once

#include <string>
#include <vector>

#include "defres/config.hpp"
#include "defres/defect.hpp"
#include "defres/floquet.hpp"
#include "defres/json_io.hpp"
#include "defres/resonance.hpp"
#include "defres/sweep.hpp"

namespace defres {

struct RunContext {
    std::string out_dir = ".";
    int threads = 1;
    bool verbose = false;
};

struct RunOutput {
    Json summary;                    ///< also written as <prefix>_<mode>.json
    std::vector<std::string> files;  ///< every file written, in order
};

/// Executes the pipeline for c.mode (band scan, defect search, truncated
/// solves, sweeps) and writes its artifacts under ctx.out_dir.
RunOutput run(const RunConfig& c, const RunContext& ctx = {});

Json to_json(const FloquetData& f);
Json to_json(const BandGapReport& r);
Json to_json(const DefectMode& m);
Json to_json(const ResonanceResult& r);
Json to_json(const SweepSummary& s);

std::string bands_csv(const BandGapReport& r, const std::string& hash);
std::string profile_csv(const std::vector<ProfileSample>& prof, const std::string& hash);
std::string state_csv(const std::vector<StateSample>& state, const std::string& hash);
std::string sweep_csv(const SweepSummary& s, const std::string& hash);

}  // namespace defres
