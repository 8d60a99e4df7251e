#include "nlx/bounds.hpp"

#include "nlx/errors.hpp"
#include "nlx/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

namespace nlx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// 1/sqrt(Psi^{-1}(v)): the length scale at which Psi(r^-2) = v.
double length_at_level(const BernsteinSpec& spec, double v) {
    if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
    try {
        return 1.0 / std::sqrt(invert_psi(spec, v));
    } catch (const RangeError&) {
        return 0.0;
    }
}

std::vector<std::pair<double, double>> level_curve(const BernsteinSpec& spec, double level) {
    std::vector<std::pair<double, double>> curve;
    for (double c : log_grid(1e-2, 1e2, 21)) curve.emplace_back(c, length_at_level(spec, level / c));
    return curve;
}

Provenance mc_provenance(const McEstimate& e, const PathConfig& cfg) {
    Provenance p;
    p.kind = "monte-carlo";
    p.stderr_ = e.stderr_;
    p.seed = cfg.seed;
    p.n_paths = e.n;
    p.dt = cfg.dt;
    return p;
}

Provenance grid_provenance(double h) {
    Provenance p;
    p.h = h;
    return p;
}

std::string fmt_num(double x) { return fmt::format("{:g}", x); }

}  // namespace

std::string_view to_string(ReportStatus s) {
    switch (s) {
    case ReportStatus::Pass: return "pass";
    case ReportStatus::Fail: return "fail";
    case ReportStatus::Skipped: return "skipped";
    case ReportStatus::Inconclusive: return "inconclusive";
    case ReportStatus::Diagnostic: return "diagnostic";
    case ReportStatus::Degenerate: return "degenerate";
    }
    return "fail";
}

BoundReport make_report(std::string name, double lhs, double rhs, double tolerance) {
    BoundReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.tolerance = tolerance;
    r.slack = lhs - rhs;
    if (std::isinf(lhs) && std::isinf(rhs) && (lhs > 0) == (rhs > 0)) r.slack = 0.0;
    r.pass = !std::isnan(r.slack) && r.slack >= -tolerance;
    r.status = r.pass ? ReportStatus::Pass : ReportStatus::Fail;
    return r;
}

PotentialStats potential_stats(std::span<const double> values) {
    PotentialStats s;
    if (values.empty()) return s;
    double vplus_inf = std::numeric_limits<double>::infinity();
    for (double v : values) {
        s.v_minus_sup = std::max(s.v_minus_sup, std::max(-v, 0.0));
        vplus_inf = std::min(vplus_inf, std::max(v, 0.0));
    }
    s.v_plus_inf = vplus_inf;
    return s;
}

PotentialStats potential_stats(const DiscreteOperator& op) { return potential_stats(op.potential); }

Potential WellSpec::potential() const {
    if (shape == Shape::General) return general;
    const ConvexDomain k = support;
    const double v = depth;
    return [k, v](std::span<const double> x) { return k.contains(x) ? -v : 0.0; };
}

void validate(const WellSpec& w) {
    if (!(w.depth > 0.0) || !std::isfinite(w.depth)) throw ParameterDomainError("well: depth must be > 0");
    if (w.support.is_all_space() || !(w.support.inradius() > 0.0)) {
        throw ParameterDomainError("well: support must be bounded with nonempty interior");
    }
    if (w.shape == WellSpec::Shape::General && !w.general) {
        throw ParameterDomainError("well: general shape needs a potential callback");
    }
}

double unit_ball_laplacian_eigenvalue(int dimension) {
    if (dimension == 1) return std::numbers::pi * std::numbers::pi / 4.0;
    if (dimension < 1 || dimension > 3) throw ParameterDomainError("unit ball eigenvalue: dimension must be 1, 2 or 3");
    static std::mutex m;
    static double cache[4] = {0, 0, 0, 0};
    std::lock_guard lock(m);
    if (cache[dimension] == 0.0) {
        GridSpec gs;
        gs.embed_factor = 1.0;
        gs.n_per_axis = dimension == 2 ? 64 : 16;
        gs.max_interior = 4000;
        const auto ball = ConvexDomain::ball(Point(static_cast<std::size_t>(dimension), 0.0), 1.0);
        cache[dimension] = eigensolve(assemble_operator(ball, gs, BernsteinSpec::linear()), 1).front().lambda;
    }
    return cache[dimension];
}

BoundReport check_extremum_bound(const EigenPair& pair, const BernsteinSpec& spec,
                                 const ConvexDomain& domain, const PotentialStats& stats,
                                 double theta, double h) {
    const double lhs = stats.shift() + pair.lambda;
    const double r = pair.r_star;
    if (!(r > h)) {
        BoundReport rep = make_report(fmt::format("extremum_bound[k={}]", pair.index), lhs, r > 0.0 ? theta * eval_psi(spec, 1.0 / (r * r)) : kNaN, 0.0);
        rep.status = ReportStatus::Degenerate;
        rep.pass = false;
        rep.note = fmt::format("maximizer within one cell of the boundary (r* = {}, h = {})", fmt_num(r), fmt_num(h));
        rep.provenance = grid_provenance(h);
        return rep;
    }
    const double rhs = theta * eval_psi(spec, 1.0 / (r * r));
    const double tol = theta * eval_psi(spec, 1.0 / ((r - h) * (r - h))) - rhs;
    BoundReport rep = make_report(fmt::format("extremum_bound[k={}]", pair.index), lhs, rhs, tol);
    rep.provenance = grid_provenance(h);
    rep.extras["k"] = pair.index;
    rep.extras["lambda"] = pair.lambda;
    rep.extras["r_star"] = r;
    rep.extras["theta"] = theta;
    rep.extras["tie_count"] = static_cast<double>(pair.tie_count);
    rep.extras["min_distance"] = length_at_level(spec, lhs / theta);
    rep.extras["inradius"] = domain.inradius();
    return rep;
}

BoundReport check_faber_krahn(const EigenPair& pair, const BernsteinSpec& spec,
                              const ConvexDomain& domain, const PotentialStats& stats, double theta) {
    if (!strictly_increasing(spec)) throw PreconditionError("faber_krahn: Psi must be strictly increasing");
    const int d = domain.dimension();
    const double level = stats.shift() + pair.lambda;
    const double omega = unit_ball_volume(d);
    double lhs = 0.0;
    std::string note;
    if (level > 0.0) {
        try {
            lhs = domain.volume() * std::pow(invert_psi(spec, level / theta), 0.5 * d);
        } catch (const RangeError&) {
            lhs = std::numeric_limits<double>::infinity();
            note = "level beyond the range of Psi; inverse taken as +inf";
        }
    } else {
        note = "nonpositive level: Psi inverse undefined";
    }
    BoundReport rep = make_report(fmt::format("faber_krahn[k={}]", pair.index), lhs, omega, 1e-9 * omega);
    rep.note = note;
    rep.extras["k"] = pair.index;
    rep.extras["lambda"] = pair.lambda;
    rep.extras["volume"] = domain.volume();
    return rep;
}

std::vector<BoundReport> check_survival_lower(const EigenPair& pair, const BernsteinSpec& spec,
                                              const ConvexDomain& domain, const Potential& v,
                                              double v_bound, std::span<const double> t_grid,
                                              const PathConfig& cfg) {
    std::vector<BoundReport> out;
    const double lambda = pair.lambda;
    std::vector<McEstimate> est;
    if (!v) {
        est = survival_curve(spec, domain, pair.x_star, t_grid, cfg);
    } else {
        for (double t : t_grid) est.push_back(estimate_feynman_kac(spec, domain, v, v_bound, {}, pair.x_star, t, cfg));
    }
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        const double growth = std::exp(lambda * t);
        BoundReport rep = make_report(fmt::format("survival_lower[t={}]", fmt_num(t)), growth * est[i].mean, 1.0,
                                      4.0 * est[i].stderr_ * growth);
        rep.provenance = mc_provenance(est[i], cfg);
        rep.extras["t"] = t;
        rep.extras["survival"] = est[i].mean;
        rep.extras["lambda"] = lambda;
        if (est[i].error_flag) {
            rep.status = ReportStatus::Inconclusive;
            rep.note = est[i].note;
        }
        out.push_back(std::move(rep));
    }
    if (lambda > 0.0) {
        const auto s = estimate_fk_survival_time(spec, domain, v, v ? v_bound : 0.0, pair.x_star, cfg);
        double tol = 4.0 * s.stderr_;
        std::string note;
        if (s.censoring_warning) {
            const double frac = static_cast<double>(s.censored) / static_cast<double>(s.n);
            tol += frac * s.mean;
            note = s.note + "; tolerance widened by the censored fraction";
        }
        BoundReport rep = make_report("survival_integrated", s.mean, 1.0 / lambda, tol);
        rep.provenance = mc_provenance(s, cfg);
        rep.extras["lambda"] = lambda;
        rep.extras["censored"] = static_cast<double>(s.censored);
        rep.note = note;
        out.push_back(std::move(rep));
    }
    return out;
}

std::vector<Point> sup_candidates(const ConvexDomain& domain, std::span<const Point> extra) {
    std::vector<Point> out{domain.chebyshev_center()};
    for (const auto& x : extra) {
        if (domain.contains(x) && std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
    }
    return out;
}

namespace {

// Per candidate, E^x[tau^p] for every p from one path set.
std::vector<std::vector<McEstimate>> exit_moments_at(const BernsteinSpec& spec, const ConvexDomain& domain,
                                                      std::span<const double> p_list,
                                                      std::span<const Point> candidates, const PathConfig& cfg) {
    if (candidates.empty()) throw ParameterDomainError("sup estimate: no candidate start points");
    std::vector<std::vector<McEstimate>> out;
    for (const auto& x : candidates) {
        const auto sample = sample_exit_times(spec, domain, x, cfg, 1);
        std::vector<McEstimate> row;
        for (double p : p_list) row.push_back(exit_moment_from_sample(sample, p, 0, cfg.seed));
        out.push_back(std::move(row));
    }
    return out;
}

std::size_t argmax_mean(const std::vector<std::vector<McEstimate>>& m, std::size_t col) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < m.size(); ++i) {
        if (m[i][col].mean > m[best][col].mean) best = i;
    }
    return best;
}

}  // namespace

SupEstimate sup_exit_moment(const BernsteinSpec& spec, const ConvexDomain& domain, double p,
                            std::span<const Point> candidates, const PathConfig& cfg) {
    const double ps[1] = {p};
    const auto m = exit_moments_at(spec, domain, ps, candidates, cfg);
    const std::size_t i = argmax_mean(m, 0);
    return {m[i][0], candidates[i]};
}

std::vector<BoundReport> check_moment_bounds(double lambda1, const BernsteinSpec& spec,
                                             const ConvexDomain& domain, std::span<const double> p_list,
                                             std::span<const Point> candidates, const PathConfig& cfg) {
    for (double p : p_list) {
        if (!(p >= 1.0)) throw ParameterDomainError("moment bounds: p must be >= 1");
    }
    const auto m = exit_moments_at(spec, domain, p_list, candidates, cfg);
    std::vector<BoundReport> out;
    for (std::size_t c = 0; c < p_list.size(); ++c) {
        const double p = p_list[c];
        const std::size_t i = argmax_mean(m, c);
        const McEstimate& s = m[i][c];
        const double rhs = std::pow(std::tgamma(p + 1.0) / s.mean, 1.0 / p);
        double tol = 4.0 * s.stderr_ * rhs / (p * s.mean);
        BoundReport rep = make_report(fmt::format("moment_bound[p={}]", fmt_num(p)), lambda1, rhs, tol);
        rep.provenance = mc_provenance(s, cfg);
        rep.extras["p"] = p;
        rep.extras["sup_moment"] = s.mean;
        rep.extras["argmax_x0"] = candidates[i][0];
        if (s.censoring_warning) rep.note = s.note;
        out.push_back(std::move(rep));

        if (p == 1.0) {
            BoundReport c3;
            c3.name = "mean_exit_sandwich_c3";
            c3.lhs = lambda1 * s.mean;
            c3.rhs = 1.0;
            c3.slack = c3.lhs - c3.rhs;
            c3.tolerance = 4.0 * s.stderr_ * lambda1;
            c3.pass = c3.slack >= -c3.tolerance;
            c3.status = ReportStatus::Diagnostic;
            c3.provenance = mc_provenance(s, cfg);
            c3.extras["implied_C3"] = c3.lhs;
            c3.note = "implied constant lambda_1 sup E[tau]; existence-only, reported not certified";
            out.push_back(std::move(c3));
        }
    }
    return out;
}

BoundReport check_exit_sandwich(const BernsteinSpec& spec, const ConvexDomain& domain,
                                std::span<const Point> candidates, const PathConfig& cfg) {
    const auto sup = sup_exit_moment(spec, domain, 1.0, candidates, cfg);
    const double inrad = domain.inradius();
    const double rho = sup.estimate.mean * eval_psi(spec, 1.0 / (inrad * inrad));
    const double tol = 4.0 * sup.estimate.stderr_ / (sup.estimate.mean * std::numbers::ln10);
    BoundReport rep = make_report("exit_sandwich", 3.0 - std::abs(std::log10(rho)), 0.0, tol);
    rep.provenance = mc_provenance(sup.estimate, cfg);
    rep.extras["rho"] = rho;
    rep.extras["rho_stderr"] = sup.estimate.stderr_ * eval_psi(spec, 1.0 / (inrad * inrad));
    rep.extras["sup_mean_exit"] = sup.estimate.mean;
    rep.extras["inradius"] = inrad;
    rep.extras["dimension"] = domain.dimension();
    rep.note = "implied ratio rho; bracket [1e-3, 1e3]";
    if (sup.estimate.censoring_warning) rep.note += "; " + sup.estimate.note;
    return rep;
}

BoundReport check_exit_sandwich_spread(std::span<const BoundReport> sandwiches, int dimension) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    std::size_t count = 0;
    for (const auto& s : sandwiches) {
        const auto rho = s.extras.find("rho");
        const auto dim = s.extras.find("dimension");
        if (rho == s.extras.end() || dim == s.extras.end() || static_cast<int>(dim->second) != dimension) continue;
        lo = std::min(lo, rho->second);
        hi = std::max(hi, rho->second);
        ++count;
    }
    if (count < 2) {
        BoundReport rep;
        rep.name = fmt::format("exit_sandwich_spread[d={}]", dimension);
        rep.status = ReportStatus::Skipped;
        rep.note = "fewer than two sandwich reports at this dimension";
        return rep;
    }
    BoundReport rep = make_report(fmt::format("exit_sandwich_spread[d={}]", dimension), 2.0 - std::log10(hi / lo), 0.0, 0.0);
    rep.extras["rho_min"] = lo;
    rep.extras["rho_max"] = hi;
    rep.extras["count"] = static_cast<double>(count);
    return rep;
}

BoundReport check_hotspot(const EigenPair& pair_linear, const ConvexDomain& domain, double theta, double h) {
    const double lb = unit_ball_laplacian_eigenvalue(domain.dimension());
    const double rhs = std::sqrt(theta / lb) * domain.inradius();
    BoundReport rep = make_report("hotspot", pair_linear.r_star, rhs, h);
    rep.provenance = grid_provenance(h);
    rep.extras["unit_ball_eigenvalue"] = lb;
    rep.extras["inradius"] = domain.inradius();
    return rep;
}

BoundReport check_sublevel_localization(const EigenPair& pair, const Potential& v,
                                        const ConvexDomain& domain, double h, std::uint64_t seed) {
    if (!v) {
        BoundReport rep = make_report("sublevel_localization", pair.lambda, 0.0, 0.0);
        rep.note = "V = 0: the sublevel set is the whole domain";
        if (!(pair.lambda > 0.0)) rep.status = ReportStatus::Inconclusive;
        return rep;
    }
    // Convexity spot check along random chords.
    const auto [lo, hi] = domain.bounding_box();
    const int d = domain.dimension();
    Philox4x32 rng(seed, 0);
    auto draw = [&] {
        Point x(static_cast<std::size_t>(d));
        for (int tries = 0; tries < 1000; ++tries) {
            for (int j = 0; j < d; ++j) x[j] = lo[j] + (hi[j] - lo[j]) * rng.uniform_open();
            if (domain.contains(x)) return x;
        }
        throw NumericalError("sublevel localization: could not sample points in the domain");
    };
    for (int chord = 0; chord < 64; ++chord) {
        const Point a = draw();
        const Point b = draw();
        Point mid(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) mid[j] = 0.5 * (a[j] + b[j]);
        const double va = v(a), vb = v(b), vm = v(mid);
        if (vm > 0.5 * (va + vb) + 1e-9 * (std::abs(va) + std::abs(vb) + 1.0)) {
            throw PreconditionError("sublevel localization: the potential is not convex along a sampled chord");
        }
    }
    const double vx = v(pair.x_star);
    double tol = 0.0;
    Point y = pair.x_star;
    for (int j = 0; j < d; ++j) {
        for (double s : {-h, h}) {
            y[j] = pair.x_star[j] + s;
            if (domain.contains(y)) tol = std::max(tol, std::abs(v(y) - vx));
            y[j] = pair.x_star[j];
        }
    }
    BoundReport rep = make_report("sublevel_localization", pair.lambda, vx, tol);
    rep.provenance = grid_provenance(h);
    rep.extras["V_at_x_star"] = vx;
    return rep;
}

BoundReport check_well_support(const EigenPair& pair, const WellSpec& well, double h) {
    validate(well);
    const double lam_tol = 1e-8 * std::max(1.0, well.depth);
    const double dist = well.support.signed_distance(pair.x_star);
    BoundReport rep = make_report("well_support", dist, 0.0, h);
    rep.provenance = grid_provenance(h);
    rep.extras["lambda"] = pair.lambda;
    rep.extras["signed_distance"] = dist;
    if (!(pair.lambda < -lam_tol)) {
        rep.status = ReportStatus::Inconclusive;
        rep.pass = false;
        rep.note = "no bound state below zero";
    }
    return rep;
}

BoundReport check_well_interior(const EigenPair& pair, const WellSpec& well, const BernsteinSpec& spec,
                                double h, const WellInteriorOptions& opts) {
    validate(well);
    if (well.shape != WellSpec::Shape::Indicator) throw PreconditionError("well interior: needs an indicator well");
    const double lam = pair.lambda;
    const double lam_tol = 1e-8 * std::max(1.0, well.depth);
    const double dist = well.support.boundary_distance(pair.x_star);
    BoundReport rep = make_report("well_interior", dist, h, 0.0);
    rep.provenance = grid_provenance(h);
    rep.extras["distance_to_well_boundary"] = dist;
    rep.extras["lambda"] = lam;
    rep.extras["ratio_gate"] = opts.ratio_gate;
    if (!(lam < -lam_tol)) {
        rep.status = ReportStatus::Inconclusive;
        rep.pass = false;
        rep.note = "no bound state below zero";
        return rep;
    }
    const double a = std::abs(lam);
    const double ratio = (well.depth - a) / a;
    rep.extras["depth_ratio"] = ratio;
    rep.curve = level_curve(spec, a);
    if (dist > 0.0) rep.extras["rho2_max_consistent"] = a / eval_psi(spec, 1.0 / (dist * dist));
    if (ratio > opts.ratio_gate) {
        rep.status = ReportStatus::Skipped;
        rep.pass = false;
        rep.note = fmt::format("depth ratio {} above the stand-in gate {}", fmt_num(ratio), fmt_num(opts.ratio_gate));
        return rep;
    }
    rep.pass = dist > h;
    rep.status = rep.pass ? ReportStatus::Pass : ReportStatus::Fail;
    rep.note = fmt::format("stand-in gate {} for the non-explicit constant", fmt_num(opts.ratio_gate));
    return rep;
}

BoundReport check_nogo(const WellSpec& well, const BernsteinSpec& spec, std::span<const double> lambdas,
                       double rho2, double tolerance) {
    validate(well);
    const int d = well.support.dimension();
    const double inrad = well.support.inradius();
    const double gate = rho2 * eval_psi(spec, 1.0 / (inrad * inrad));
    const double lowest = lambdas.empty() ? std::numeric_limits<double>::infinity()
                                          : *std::min_element(lambdas.begin(), lambdas.end());
    const bool bound_state = lowest < -tolerance;
    BoundReport rep;
    rep.name = "nogo";
    rep.lhs = well.depth;
    rep.rhs = gate;
    rep.slack = rep.lhs - rep.rhs;
    rep.status = ReportStatus::Diagnostic;
    rep.extras["rho2_stand_in"] = rho2;
    rep.extras["lowest_lambda"] = lowest;
    rep.extras["bound_state"] = bound_state ? 1.0 : 0.0;
    rep.extras["recurrent"] = is_recurrent(spec, d) ? 1.0 : 0.0;
    if (is_recurrent(spec, d)) {
        rep.note = "recurrent case, corollary vacuous";
    } else if (well.depth < gate) {
        rep.note = bound_state ? "below the gate but a bound state was found (inconsistent with the stand-in constant)"
                               : "below the gate and no bound state: consistent";
    } else {
        rep.note = bound_state ? "gate not triggered; bound state found" : "gate not triggered; no bound state";
    }
    rep.pass = true;
    return rep;
}

BoundReport check_torsion_comparison(const Eigen::VectorXd& torsion_vec, const EigenPair& pair_free,
                                     std::optional<double> c) {
    if (torsion_vec.size() == 0 || static_cast<std::size_t>(torsion_vec.size()) <= pair_free.x_star_index) {
        throw ParameterDomainError("torsion comparison: torsion vector does not match the eigenpair grid");
    }
    const double sup = torsion_vec.maxCoeff();
    const double at_star = torsion_vec[static_cast<Eigen::Index>(pair_free.x_star_index)];
    const double ratio = sup / at_star;
    const double bound = c.value_or(pair_free.lambda * sup);
    BoundReport rep = make_report("torsion_comparison", bound, ratio, 1e-9 * bound);
    rep.extras["ratio"] = ratio;
    rep.extras["C"] = bound;
    rep.extras["sup_torsion"] = sup;
    rep.extras["torsion_at_x_star"] = at_star;
    if (!c) rep.note = "C = lambda_1 sup v (implied constant of the mean exit time sandwich)";
    return rep;
}

BoundReport check_kappa_shell_bound(const EigenPair& pair, const BernsteinSpec& spec,
                                    const ConvexDomain& domain, const ConvexDomain& support, double kappa) {
    if (!domain.contains(support.chebyshev_center())) {
        throw PreconditionError("kappa shell: the potential support must lie inside the domain");
    }
    BoundReport rep;
    rep.name = "kappa_shell";
    rep.lhs = pair.r_star;
    rep.rhs = 0.5 * kappa;
    rep.slack = rep.lhs - rep.rhs;
    rep.extras["kappa"] = kappa;
    rep.extras["lambda"] = pair.lambda;
    rep.extras["r_star"] = pair.r_star;
    if (!(kappa > 0.0) || pair.r_star > 0.5 * kappa) {
        rep.status = ReportStatus::Skipped;
        rep.note = "gate r* <= kappa/2 unmet";
        return rep;
    }
    rep.status = ReportStatus::Diagnostic;
    rep.pass = true;
    if (pair.lambda > 0.0) {
        rep.curve = level_curve(spec, pair.lambda);
        rep.extras["implied_zeta"] = pair.lambda / eval_psi(spec, 1.0 / (pair.r_star * pair.r_star));
    }
    rep.note = "qualitative: zeta is existence-only";
    return rep;
}

}  // namespace nlx
