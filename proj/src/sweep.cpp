#include "defres/sweep.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "defres/errors.hpp"

namespace defres {

std::string to_string(SolveKind k)
{
    switch (k) {
    case SolveKind::resonance: return "resonance";
    case SolveKind::bound: return "bound";
    case SolveKind::edge: return "edge";
    }
    return "resonance";
}

ResonanceResult solve_mode(const Potential& p, const DefectMode& mode, SolveKind kind, double M,
                           const SolveOptions& opts, bool force_general)
{
    const ModeShape& s = mode.shape;
    switch (kind) {
    case SolveKind::edge:
        if (!s.half_line) throw ConfigError("edge solves need a half-line mode");
        return solve_edge(p, mode.E, M, opts);
    case SolveKind::bound:
        if (s.parity != Parity::none && !force_general) return solve_bound_negative(p, mode.E, s.parity, M, opts);
        return solve_general(p, mode.E, s.w0, s.normalization, M, SqrtBranch{BranchMode::bound}, opts);
    case SolveKind::resonance:
        if (s.parity != Parity::none && !force_general) return solve_parity(p, mode.E, s.parity, M, {}, opts);
        return solve_general(p, mode.E, s.w0, s.normalization, M, {}, opts);
    }
    throw ConfigError("unknown solve kind");
}

LineFit fit_rate(const std::vector<std::pair<double, double>>& points)
{
    if (points.size() < 3) throw ConfigError("fit_rate: need at least 3 points above the noise floor");
    std::vector<double> x, y;
    for (const auto& [M, v] : points) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("fit_rate: values must be positive and finite");
        x.push_back(M);
        y.push_back(std::log(v));
    }
    return least_squares(x, y);
}

namespace {

RateFit make_fit(const std::string& name, double target, const std::vector<std::pair<double, double>>& pts)
{
    RateFit f;
    f.quantity = name;
    f.target = target;
    if (pts.size() >= 3) {
        f.fit = fit_rate(pts);
        f.rel_error = std::abs(f.fit->slope - target) / std::abs(target);
    } else {
        f.rel_error = std::numeric_limits<double>::quiet_NaN();
    }
    return f;
}

}  // namespace

SweepSummary run_sweep(const Potential& p, const DefectMode& mode, SolveKind kind, const std::vector<double>& Ms,
                       const SolveOptions& opts, int threads, bool force_general)
{
    SweepSummary s;
    s.E = mode.E;
    s.k = mode.k;
    s.kind = kind;
    s.general = kind != SolveKind::edge && (mode.shape.parity == Parity::none || force_general);
    s.records.resize(Ms.size());

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(Ms.size());
    auto worker = [&]() {
        for (std::size_t i = next++; i < Ms.size(); i = next++) {
            try {
                s.records[i].M = Ms[i];
                s.records[i].result = solve_mode(p, mode, kind, Ms[i], opts, force_general);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(Ms.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    s.noise_floor = 100.0 * std::numeric_limits<double>::epsilon() * std::abs(s.E);
    std::vector<std::pair<double, double>> e_pts, a_pts, t_pts, d_pts;
    for (std::size_t i = 0; i < s.records.size(); ++i) {
        SweepRecord& r = s.records[i];
        r.err_vs_E = std::abs(r.result.z_star - s.E);
        r.err_vs_asym = std::abs(r.result.z_star - r.result.asymptotic_z1);
        r.k_fit = i == 0 ? std::numeric_limits<double>::quiet_NaN()
                         : -0.5 * std::log(r.err_vs_E / s.records[i - 1].err_vs_E) / (r.M - s.records[i - 1].M);
        r.above_noise_floor = r.err_vs_E >= s.noise_floor;
        if (!r.above_noise_floor) {
            if (!s.noise_floor_M) s.noise_floor_M = r.M;
            continue;
        }
        e_pts.emplace_back(r.M, r.err_vs_E);
        if (r.err_vs_asym >= s.noise_floor) a_pts.emplace_back(r.M, r.err_vs_asym);
        t_pts.emplace_back(r.M, std::abs(r.result.theta_E));
        d_pts.emplace_back(r.M, std::abs(r.result.dtheta_E));
    }
    for (std::size_t i = s.records.size(); i-- > 0;) {
        if (!s.records[i].result.in_ball) break;
        s.ball_entry_M = s.records[i].M;
    }
    s.err_vs_E = make_fit("abs_err_vs_E", -2.0 * s.k, e_pts);
    s.err_vs_asym = make_fit("abs_err_vs_asymptotic", -4.0 * s.k, a_pts);
    s.theta_E = make_fit("abs_theta_E", -s.k, t_pts);
    s.dtheta_E = make_fit(s.general ? "abs_jacobian_det_E" : "abs_dtheta_E", (s.general ? 2.0 : 1.0) * s.k, d_pts);
    return s;
}

}  // namespace defres
