#include "defres/config.hpp"

#include <fstream>
#include <sstream>

#include "defres/errors.hpp"

namespace defres {

std::string to_string(RunMode m)
{
    switch (m) {
    case RunMode::bands: return "bands";
    case RunMode::defect: return "defect";
    case RunMode::resonance: return "resonance";
    case RunMode::bound: return "bound";
    case RunMode::edge: return "edge";
    case RunMode::sweep: return "sweep";
    }
    return "bands";
}

RunMode parse_run_mode(const std::string& s)
{
    for (RunMode m : {RunMode::bands, RunMode::defect, RunMode::resonance, RunMode::bound, RunMode::edge,
                      RunMode::sweep})
        if (to_string(m) == s) return m;
    throw ConfigError("mode: unknown value '" + s + "' (expected bands|defect|resonance|bound|edge|sweep)");
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

double number(const Json& j, const std::string& path)
{
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int integer(const Json& j, const std::string& path)
{
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

double positive(const Json& j, const std::string& path)
{
    const double v = number(j, path);
    if (!(v > 0.0)) fail(path, "must be > 0");
    return v;
}

std::vector<double> numbers(const Json& j, const std::string& path)
{
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

void check_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) fail(path.empty() ? "config" : path, "expected an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) fail(path.empty() ? key : path + "." + key, "unknown field");
    }
}

Potential parse_potential(const Json& j)
{
    check_keys(j, "potential", {"periodic", "defect", "symmetric", "half_line"});
    Potential p;
    if (!j.contains("periodic")) fail("potential.periodic", "missing");
    const Json& per = j["periodic"];
    check_keys(per, "potential.periodic", {"cos", "sin"});
    if (per.contains("cos")) p.periodic.cos_coeffs = numbers(per["cos"], "potential.periodic.cos");
    if (per.contains("sin")) p.periodic.sin_coeffs = numbers(per["sin"], "potential.periodic.sin");
    if (j.contains("defect")) {
        const Json& d = j["defect"];
        check_keys(d, "potential.defect", {"shape", "amplitude", "rho", "center"});
        if (d.contains("shape")) {
            if (!d["shape"].is_string()) fail("potential.defect.shape", "expected a string");
            const std::string s = d["shape"].get<std::string>();
            if (s == "smooth_bump")
                p.defect.shape = DefectShape::smooth_bump;
            else if (s == "cosine_window")
                p.defect.shape = DefectShape::cosine_window;
            else
                fail("potential.defect.shape", "unknown shape '" + s + "' (expected smooth_bump|cosine_window)");
        }
        if (d.contains("amplitude")) p.defect.amplitude = number(d["amplitude"], "potential.defect.amplitude");
        if (d.contains("rho")) p.defect.rho = positive(d["rho"], "potential.defect.rho");
        if (d.contains("center")) p.defect.center = number(d["center"], "potential.defect.center");
    }
    if (j.contains("symmetric")) {
        if (!j["symmetric"].is_boolean()) fail("potential.symmetric", "expected a boolean");
        p.symmetric = j["symmetric"].get<bool>();
    }
    if (j.contains("half_line")) {
        if (!j["half_line"].is_boolean()) fail("potential.half_line", "expected a boolean");
        p.half_line = j["half_line"].get<bool>();
    }
    validate(p);
    return p;
}

}  // namespace

Json to_json(const Potential& p)
{
    Json j;
    j["periodic"]["cos"] = p.periodic.cos_coeffs;
    j["periodic"]["sin"] = p.periodic.sin_coeffs;
    j["defect"]["shape"] = p.defect.shape == DefectShape::smooth_bump ? "smooth_bump" : "cosine_window";
    j["defect"]["amplitude"] = p.defect.amplitude;
    j["defect"]["rho"] = p.defect.rho;
    j["defect"]["center"] = p.defect.center;
    j["symmetric"] = p.symmetric;
    j["half_line"] = p.half_line;
    return j;
}

void finalize(RunConfig& c)
{
    Json j;
    j["mode"] = to_string(c.mode);
    j["potential"] = to_json(c.potential);
    j["window"] = {c.z_min, c.z_max};
    j["n_samples"] = c.n_samples;
    j["gap"] = c.gap ? Json::array({c.gap->first, c.gap->second}) : Json();
    j["mode_index"] = c.mode_index;
    j["M"] = c.M ? Json(*c.M) : Json();
    j["M_list"] = c.M_list;
    j["sweep_kind"] = c.sweep_kind ? Json(to_string(*c.sweep_kind)) : Json();
    j["solver"] = c.force_general ? "general" : "auto";
    j["tolerances"] = {{"ode", c.tol.ode},           {"energy", c.tol.energy},     {"step", c.tol.step},
                       {"residual", c.tol.residual}, {"max_iter", c.tol.max_iter}, {"newton_after", c.tol.newton_after}};
    j["search_grid"] = c.search_grid;
    j["profile"] = {{"extent", c.profile_extent}, {"samples_per_unit", c.samples_per_unit}};
    j["state"] = {{"extent", c.state_extent}, {"samples", c.state_samples}};
    j["prefix"] = c.prefix;
    c.canonical = j;
    c.hash = fnv1a_hex(to_text(j));
}

RunConfig parse_config(const Json& j)
{
    check_keys(j, "", {"mode", "potential", "window", "n_samples", "gap", "mode_index", "M", "M_list", "sweep_kind",
                       "solver", "tolerances", "search_grid", "profile", "state", "prefix"});
    RunConfig c;
    if (j.contains("mode")) {
        if (!j["mode"].is_string()) fail("mode", "expected a string");
        c.mode = parse_run_mode(j["mode"].get<std::string>());
    }
    if (!j.contains("potential")) fail("potential", "missing");
    c.potential = parse_potential(j["potential"]);
    if (j.contains("window")) {
        const auto w = numbers(j["window"], "window");
        if (w.size() != 2 || !(w[0] < w[1])) fail("window", "expected [z_min, z_max] with z_min < z_max");
        c.z_min = w[0];
        c.z_max = w[1];
    }
    if (j.contains("n_samples")) {
        c.n_samples = integer(j["n_samples"], "n_samples");
        if (c.n_samples < 2) fail("n_samples", "must be >= 2");
    }
    if (j.contains("gap") && !j["gap"].is_null()) {
        const auto g = numbers(j["gap"], "gap");
        if (g.size() != 2 || !(g[0] < g[1])) fail("gap", "expected [lo, hi] with lo < hi");
        c.gap = std::make_pair(g[0], g[1]);
    }
    if (j.contains("mode_index")) {
        c.mode_index = integer(j["mode_index"], "mode_index");
        if (c.mode_index < 0) fail("mode_index", "must be >= 0");
    }
    if (j.contains("M") && !j["M"].is_null()) c.M = number(j["M"], "M");
    if (j.contains("M_list")) c.M_list = numbers(j["M_list"], "M_list");
    if (j.contains("sweep_kind") && !j["sweep_kind"].is_null()) {
        if (!j["sweep_kind"].is_string()) fail("sweep_kind", "expected a string");
        const std::string s = j["sweep_kind"].get<std::string>();
        if (s == "resonance")
            c.sweep_kind = SolveKind::resonance;
        else if (s == "bound")
            c.sweep_kind = SolveKind::bound;
        else if (s == "edge")
            c.sweep_kind = SolveKind::edge;
        else
            fail("sweep_kind", "unknown value '" + s + "' (expected resonance|bound|edge)");
    }
    if (j.contains("solver")) {
        if (!j["solver"].is_string()) fail("solver", "expected a string");
        const std::string s = j["solver"].get<std::string>();
        if (s != "auto" && s != "parity" && s != "general") fail("solver", "expected auto|parity|general");
        c.force_general = s == "general";
        if (s == "parity" && !c.potential.symmetric) fail("solver", "parity solver needs potential.symmetric = true");
    }
    if (j.contains("tolerances")) {
        const Json& t = j["tolerances"];
        check_keys(t, "tolerances", {"ode", "energy", "step", "residual", "max_iter", "newton_after"});
        if (t.contains("ode")) c.tol.ode = positive(t["ode"], "tolerances.ode");
        if (t.contains("energy")) c.tol.energy = positive(t["energy"], "tolerances.energy");
        if (t.contains("step")) c.tol.step = positive(t["step"], "tolerances.step");
        if (t.contains("residual")) c.tol.residual = positive(t["residual"], "tolerances.residual");
        if (t.contains("max_iter")) c.tol.max_iter = integer(t["max_iter"], "tolerances.max_iter");
        if (t.contains("newton_after")) c.tol.newton_after = integer(t["newton_after"], "tolerances.newton_after");
        if (c.tol.max_iter < 1) fail("tolerances.max_iter", "must be >= 1");
    }
    if (j.contains("search_grid")) {
        c.search_grid = integer(j["search_grid"], "search_grid");
        if (c.search_grid < 2) fail("search_grid", "must be >= 2");
    }
    if (j.contains("profile")) {
        const Json& pr = j["profile"];
        check_keys(pr, "profile", {"extent", "samples_per_unit"});
        if (pr.contains("extent")) c.profile_extent = positive(pr["extent"], "profile.extent");
        if (pr.contains("samples_per_unit")) c.samples_per_unit = integer(pr["samples_per_unit"], "profile.samples_per_unit");
        if (c.samples_per_unit < 1) fail("profile.samples_per_unit", "must be >= 1");
    }
    if (j.contains("state")) {
        const Json& st = j["state"];
        check_keys(st, "state", {"extent", "samples"});
        if (st.contains("extent")) c.state_extent = positive(st["extent"], "state.extent");
        if (st.contains("samples")) c.state_samples = integer(st["samples"], "state.samples");
        if (c.state_samples < 2) fail("state.samples", "must be >= 2");
    }
    if (j.contains("prefix")) {
        if (!j["prefix"].is_string() || j["prefix"].get<std::string>().empty()) fail("prefix", "expected a non-empty string");
        c.prefix = j["prefix"].get<std::string>();
    }
    finalize(c);
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return parse_config(j);
}

void validate_for_mode(const RunConfig& c)
{
    const double rho = c.potential.rho();
    auto check_M = [rho](double M, const std::string& path) {
        if (!(M > rho))
            fail(path, "truncation radius must exceed the defect support radius rho = " + std::to_string(rho) +
                           " (got " + std::to_string(M) + ")");
    };
    switch (c.mode) {
    case RunMode::bands:
    case RunMode::defect: break;
    case RunMode::resonance:
    case RunMode::bound:
    case RunMode::edge:
        if (!c.M) fail("M", "required for mode " + to_string(c.mode));
        check_M(*c.M, "M");
        if (c.mode == RunMode::edge && !c.potential.half_line) fail("potential.half_line", "edge mode needs a half-line potential");
        break;
    case RunMode::sweep:
        if (c.M_list.size() < 3) fail("M_list", "sweep needs at least 3 truncation radii");
        for (std::size_t i = 0; i < c.M_list.size(); ++i) {
            check_M(c.M_list[i], "M_list[" + std::to_string(i) + "]");
            if (i > 0 && !(c.M_list[i] > c.M_list[i - 1])) fail("M_list", "must be strictly increasing");
        }
        if (c.sweep_kind == SolveKind::edge && !c.potential.half_line)
            fail("potential.half_line", "edge sweeps need a half-line potential");
        break;
    }
}

}  // namespace defres
