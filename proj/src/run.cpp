#include "defres/run.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "defres/errors.hpp"

namespace defres {

namespace {

Json pair(Complex z) { return Json::array({z.real(), z.imag()}); }

template <class T>
Json optional(const std::optional<T>& v)
{
    return v ? Json(*v) : Json();
}

Json optional_pair(const std::optional<Complex>& v) { return v ? pair(*v) : Json(); }

std::string kind_name(const SpectralInterval& iv) { return iv.kind == SpectralKind::gap ? "gap" : "band"; }

class Emitter {
public:
    Emitter(const RunConfig& c, const RunContext& ctx) : c_(c), ctx_(ctx)
    {
        std::filesystem::create_directories(ctx.out_dir);
    }

    std::string write(const std::string& suffix, const std::string& text)
    {
        const std::string path = (std::filesystem::path(ctx_.out_dir) / (c_.prefix + "_" + suffix)).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot write output file '" + path + "'");
        out << text;
        files.push_back(path);
        log("wrote " + path);
        return c_.prefix + "_" + suffix;
    }

    void log(const std::string& msg) const
    {
        if (ctx_.verbose) std::cerr << "[defres] " << msg << "\n";
    }

    std::vector<std::string> files;

private:
    const RunConfig& c_;
    const RunContext& ctx_;
};

std::string csv_header(const std::string& hash, const std::string& columns)
{
    return "# config_hash=" + hash + " columns: " + columns + "\n" + columns + "\n";
}

DefectSearchOptions search_options(const RunConfig& c)
{
    DefectSearchOptions o;
    o.n_grid = c.search_grid;
    o.tol = c.tol.energy;
    o.profile_extent = c.profile_extent;
    o.samples_per_unit = c.samples_per_unit;
    o.ode_tol = c.tol.ode;
    return o;
}

SolveOptions solve_options(const RunConfig& c)
{
    SolveOptions o;
    o.step_tol = c.tol.step;
    o.residual_tol = c.tol.residual;
    o.max_iter = c.tol.max_iter;
    o.newton_after = c.tol.newton_after;
    o.ode_tol = c.tol.ode;
    return o;
}

struct Search {
    BandGapReport report;
    std::vector<DefectMode> modes;
};

Search search(const RunConfig& c, const Emitter& em)
{
    Search s;
    s.report = band_gap_scan(c.potential.periodic, c.z_min, c.z_max, c.n_samples, 1e-8, c.tol.ode);
    std::vector<SpectralInterval> gaps =
        c.gap ? std::vector<SpectralInterval>{{c.gap->first, c.gap->second, SpectralKind::gap}} : s.report.gaps();
    for (const auto& g : gaps) {
        em.log("searching gap [" + format_number(g.lo) + ", " + format_number(g.hi) + "]");
        for (auto& m : find_defect_modes(c.potential, g, search_options(c))) s.modes.push_back(std::move(m));
    }
    return s;
}

SolveKind kind_for(const RunConfig& c)
{
    switch (c.mode) {
    case RunMode::resonance: return SolveKind::resonance;
    case RunMode::bound: return SolveKind::bound;
    case RunMode::edge: return SolveKind::edge;
    default: break;
    }
    if (c.sweep_kind) return *c.sweep_kind;
    return c.potential.half_line ? SolveKind::edge : SolveKind::resonance;
}

const DefectMode& select_mode(const RunConfig& c, const std::vector<DefectMode>& modes, SolveKind kind)
{
    std::vector<const DefectMode*> admissible;
    for (const auto& m : modes) {
        const bool ok = kind == SolveKind::resonance ? m.E > 0.0 && !m.shape.half_line
                        : kind == SolveKind::bound   ? m.E < 0.0 && !m.shape.half_line
                                                     : m.E < 0.0 && m.shape.half_line;
        if (ok) admissible.push_back(&m);
    }
    if (static_cast<std::size_t>(c.mode_index) >= admissible.size())
        throw PreconditionError("no admissible defect mode with index " + std::to_string(c.mode_index) + " for a " +
                                to_string(kind) + " solve (" + std::to_string(admissible.size()) + " found)");
    return *admissible[c.mode_index];
}

Json closed_form(const RunConfig& c, const DefectMode& m, const ResonanceResult& r)
{
    Json j;
    if (r.shape.half_line) return Json();
    if (m.shape.parity != Parity::none && !r.w_star) {
        const AsymptoticParity a = asymptotic_parity(c.potential, m.E, m.shape.parity, r.M, r.branch, c.tol.ode);
        j["z1"] = pair(a.z1);
        j["re"] = a.re;
        j["im"] = a.im;
        j["dtheta_variation_of_parameters"] = pair(a.dtheta_vp);
        j["dtheta_leading"] = pair(a.dtheta_leading);
        j["int_u2"] = a.int_u2;
    } else {
        const AsymptoticGeneral a =
            asymptotic_general(c.potential, m.E, r.shape.w0, r.shape.normalization, r.M, r.branch, c.tol.ode);
        j["w1"] = pair(a.w1);
        j["z1"] = pair(a.z1);
    }
    return j;
}

}  // namespace

Json to_json(const FloquetData& f)
{
    Json j;
    j["discriminant"] = pair(f.discriminant);
    j["lambda_small"] = pair(f.lambda_small);
    j["lambda_large"] = pair(f.lambda_large);
    j["k"] = f.k;
    return j;
}

Json to_json(const BandGapReport& r)
{
    Json j;
    j["resolution"] = r.resolution;
    j["intervals"] = Json::array();
    for (const auto& iv : r.intervals) j["intervals"].push_back({{"kind", kind_name(iv)}, {"lo", iv.lo}, {"hi", iv.hi}});
    j["gaps"] = Json::array();
    for (const auto& g : r.gaps()) j["gaps"].push_back(Json::array({g.lo, g.hi}));
    return j;
}

Json to_json(const DefectMode& m)
{
    Json j;
    j["E"] = m.E;
    j["parity"] = to_string(m.shape.parity);
    j["normalization"] = to_string(m.shape.normalization);
    j["half_line"] = m.shape.half_line;
    j["w0"] = m.shape.w0;
    j["k"] = m.k;
    j["k_fit"] = m.k_fit;
    j["residual"] = m.residual;
    return j;
}

Json to_json(const ResonanceResult& r)
{
    Json j;
    j["E"] = r.E;
    j["M"] = r.M;
    j["k"] = r.k;
    j["z_star"] = pair(r.z_star);
    j["w_star"] = optional_pair(r.w_star);
    j["asymptotic_z1"] = pair(r.asymptotic_z1);
    j["asymptotic_w1"] = optional_pair(r.asymptotic_w1);
    j["residual"] = r.residual;
    j["iterations"] = r.iterations;
    j["lifetime"] = r.lifetime;
    j["branch"] = r.branch.mode == BranchMode::resonance ? "resonance" : "bound";
    j["parity"] = to_string(r.shape.parity);
    j["ball_radius"] = r.ball_radius;
    j["in_ball"] = r.in_ball;
    j["used_newton"] = r.used_newton;
    j["rounding_limited"] = r.rounding_limited;
    j["precondition_margin"] = optional(r.precondition_margin);
    j["jacobian_scale"] = optional(r.jacobian_scale);
    j["theta_E"] = pair(r.theta_E);
    j["dtheta_E"] = pair(r.dtheta_E);
    j["iterates"] = Json::array();
    for (Complex z : r.iterates) j["iterates"].push_back(pair(z));
    if (!r.w_iterates.empty()) {
        j["w_iterates"] = Json::array();
        for (Complex w : r.w_iterates) j["w_iterates"].push_back(pair(w));
    }
    return j;
}

Json to_json(const SweepSummary& s)
{
    auto fit = [](const RateFit& f) {
        Json j;
        j["quantity"] = f.quantity;
        j["target"] = f.target;
        j["slope"] = f.fit ? Json(f.fit->slope) : Json();
        j["stderr"] = f.fit ? Json(f.fit->stderr_slope) : Json();
        j["points"] = f.fit ? f.fit->n : 0;
        j["rel_error"] = f.rel_error;
        return j;
    };
    Json j;
    j["E"] = s.E;
    j["k"] = s.k;
    j["kind"] = to_string(s.kind);
    j["solver"] = s.kind == SolveKind::edge ? "edge" : s.general ? "general" : "parity";
    j["noise_floor"] = s.noise_floor;
    j["noise_floor_M"] = optional(s.noise_floor_M);
    j["ball_entry_M"] = optional(s.ball_entry_M);
    j["fits"] = {{"err_vs_E", fit(s.err_vs_E)},
                 {"err_vs_asymptotic", fit(s.err_vs_asym)},
                 {"theta_E", fit(s.theta_E)},
                 {"dtheta_E", fit(s.dtheta_E)}};
    j["records"] = Json::array();
    for (const auto& r : s.records) {
        Json rec;
        rec["M"] = r.M;
        rec["z_star"] = pair(r.result.z_star);
        rec["w_star"] = optional_pair(r.result.w_star);
        rec["abs_err_vs_E"] = r.err_vs_E;
        rec["abs_err_vs_asymptotic"] = r.err_vs_asym;
        rec["k_fit"] = r.k_fit;
        rec["abs_theta_E"] = std::abs(r.result.theta_E);
        rec["abs_dtheta_E"] = std::abs(r.result.dtheta_E);
        rec["residual"] = r.result.residual;
        rec["iterations"] = r.result.iterations;
        rec["in_ball"] = r.result.in_ball;
        rec["above_noise_floor"] = r.above_noise_floor;
        j["records"].push_back(rec);
    }
    return j;
}

std::string bands_csv(const BandGapReport& r, const std::string& hash)
{
    std::string out = csv_header(hash, "z,delta_re,delta_im,in_gap");
    for (const auto& s : r.samples)
        out += format_number(s.z) + "," + format_number(s.discriminant.real()) + "," +
               format_number(s.discriminant.imag()) + "," + (s.in_gap ? "1" : "0") + "\n";
    return out;
}

std::string profile_csv(const std::vector<ProfileSample>& prof, const std::string& hash)
{
    std::string out = csv_header(hash, "x,phi,dphi");
    for (const auto& s : prof) out += format_number(s.x) + "," + format_number(s.phi) + "," + format_number(s.dphi) + "\n";
    return out;
}

std::string state_csv(const std::vector<StateSample>& state, const std::string& hash)
{
    std::string out = csv_header(hash, "x,re_phi,im_phi,re_dphi,im_dphi");
    for (const auto& s : state)
        out += format_number(s.x) + "," + format_number(s.phi.real()) + "," + format_number(s.phi.imag()) + "," +
               format_number(s.dphi.real()) + "," + format_number(s.dphi.imag()) + "\n";
    return out;
}

std::string sweep_csv(const SweepSummary& s, const std::string& hash)
{
    std::string out = csv_header(hash, "M,re_z,im_z,abs_err_vs_E,abs_err_vs_asymptotic,k_fit");
    for (const auto& r : s.records)
        out += format_number(r.M) + "," + format_number(r.result.z_star.real()) + "," +
               format_number(r.result.z_star.imag()) + "," + format_number(r.err_vs_E) + "," +
               format_number(r.err_vs_asym) + "," + format_number(r.k_fit) + "\n";
    return out;
}

RunOutput run(const RunConfig& c, const RunContext& ctx)
{
    validate_for_mode(c);
    Emitter em(c, ctx);
    Json summary;
    summary["config_hash"] = c.hash;
    summary["mode"] = to_string(c.mode);

    if (c.mode == RunMode::bands) {
        em.log("scanning [" + format_number(c.z_min) + ", " + format_number(c.z_max) + "]");
        const BandGapReport rep =
            band_gap_scan(c.potential.periodic, c.z_min, c.z_max, c.n_samples, 1e-8, c.tol.ode);
        summary["report"] = to_json(rep);
        summary["csv"] = em.write("bands.csv", bands_csv(rep, c.hash));
        em.write("bands.json", to_text(summary));
        return {summary, em.files};
    }

    const Search s = search(c, em);
    if (c.mode == RunMode::defect) {
        summary["report"] = to_json(s.report);
        summary["modes"] = Json::array();
        for (std::size_t i = 0; i < s.modes.size(); ++i) {
            Json m = to_json(s.modes[i]);
            m["profile_csv"] = em.write("mode" + std::to_string(i) + ".csv", profile_csv(s.modes[i].profile, c.hash));
            summary["modes"].push_back(m);
        }
        em.write("defect.json", to_text(summary));
        return {summary, em.files};
    }

    const SolveKind kind = kind_for(c);
    const DefectMode& mode = select_mode(c, s.modes, kind);
    summary["defect_mode"] = to_json(mode);
    em.log("selected mode E = " + format_number(mode.E));

    if (c.mode == RunMode::sweep) {
        const SweepSummary sw = run_sweep(c.potential, mode, kind, c.M_list, solve_options(c), ctx.threads, c.force_general);
        summary["sweep"] = to_json(sw);
        summary["csv"] = em.write("sweep.csv", sweep_csv(sw, c.hash));
        em.write("sweep.json", to_text(summary));
        return {summary, em.files};
    }

    const ResonanceResult r = solve_mode(c.potential, mode, kind, *c.M, solve_options(c), c.force_general);
    summary["result"] = to_json(r);
    summary["closed_form"] = closed_form(c, mode, r);
    const double extent = c.state_extent > 0.0 ? c.state_extent : *c.M + 3.0;
    summary["state_csv"] = em.write(to_string(c.mode) + "_state.csv",
                                    state_csv(resonant_state(c.potential, r, extent, c.state_samples, c.tol.ode), c.hash));
    em.write(to_string(c.mode) + ".json", to_text(summary));
    return {summary, em.files};
}

}  // namespace defres
