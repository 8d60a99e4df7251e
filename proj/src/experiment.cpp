#include "nlx/experiment.hpp"

#include "nlx/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace nlx {

namespace {

const json& field(const json& j, const char* key, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end()) throw UsageError(fmt::format("{}.{}: required field missing", path, key));
    return *it;
}

double number(const json& j, const char* key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_number()) throw UsageError(fmt::format("{}.{}: expected a number", path, key));
    return v.get<double>();
}

double number_or(const json& j, const char* key, const std::string& path, double fallback) {
    return j.contains(key) ? number(j, key, path) : fallback;
}

std::uint64_t unsigned_or(const json& j, const char* key, const std::string& path, std::uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw UsageError(fmt::format("{}.{}: expected a nonnegative integer", path, key));
    }
    return v.get<std::uint64_t>();
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw UsageError(fmt::format("{}: expected an object", path));
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw UsageError(fmt::format("{}.{}: unknown field", path, key));
        }
    }
}

std::vector<double> number_list(const json& j, const std::string& path) {
    if (!j.is_array()) throw UsageError(fmt::format("{}: expected an array of numbers", path));
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw UsageError(fmt::format("{}[{}]: expected a number", path, i));
        out.push_back(j[i].get<double>());
    }
    return out;
}

GridSpec grid_from_json(const json& j, const std::string& path) {
    reject_unknown(j, path, {"n_per_axis", "embed_factor", "image_padding"});
    GridSpec g;
    g.n_per_axis = unsigned_or(j, "n_per_axis", path, g.n_per_axis);
    g.embed_factor = number_or(j, "embed_factor", path, g.embed_factor);
    g.image_padding = static_cast<int>(unsigned_or(j, "image_padding", path, 0));
    if (g.n_per_axis < 4) throw UsageError(path + ".n_per_axis: must be >= 4");
    if (!(g.embed_factor >= 1.0)) throw UsageError(path + ".embed_factor: must be >= 1");
    return g;
}

PathConfig mc_from_json(const json& j, const std::string& path) {
    reject_unknown(j, path, {"dt", "horizon", "n_paths", "seed", "workers"});
    PathConfig c;
    c.dt = number_or(j, "dt", path, c.dt);
    c.horizon = number_or(j, "horizon", path, c.horizon);
    c.n_paths = unsigned_or(j, "n_paths", path, c.n_paths);
    c.seed = unsigned_or(j, "seed", path, c.seed);
    c.workers = static_cast<unsigned>(unsigned_or(j, "workers", path, 0));
    try {
        validate(c);
    } catch (const Error& e) {
        throw UsageError(fmt::format("{}: {}", path, e.what()));
    }
    return c;
}

json grid_to_json(const GridSpec& g) {
    json j{{"n_per_axis", g.n_per_axis}, {"embed_factor", g.embed_factor}};
    if (g.image_padding != 0) j["image_padding"] = g.image_padding;
    return j;
}

// Distance from the support's bounding box to the boundary of an interval or box domain.
std::optional<double> box_gap(const ConvexDomain& domain, const ConvexDomain& support) {
    if (domain.kind() != ConvexDomain::Kind::Interval && domain.kind() != ConvexDomain::Kind::Box) return std::nullopt;
    const auto [klo, khi] = support.bounding_box();
    double gap = std::numeric_limits<double>::infinity();
    for (int j = 0; j < domain.dimension(); ++j) {
        gap = std::min({gap, klo[j] - domain.lo()[j], domain.hi()[j] - khi[j]});
    }
    return gap;
}

BoundReport skipped(std::string name, std::string note) {
    BoundReport r;
    r.name = std::move(name);
    r.status = ReportStatus::Skipped;
    r.note = std::move(note);
    return r;
}

std::string context(const char* module, const std::exception& e) { return fmt::format("{}: {}", module, e.what()); }

template <typename F>
auto with_context(const char* module, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const CapacityError& e) {
        throw CapacityError(context(module, e));
    } catch (const NumericalError& e) {
        throw NumericalError(context(module, e));
    }
}

}  // namespace

std::string_view to_string(PotentialDescriptor::Type t) {
    switch (t) {
    case PotentialDescriptor::Type::None: return "none";
    case PotentialDescriptor::Type::Constant: return "constant";
    case PotentialDescriptor::Type::Quadratic: return "quadratic";
    case PotentialDescriptor::Type::Well: return "well";
    case PotentialDescriptor::Type::KatoTruncated: return "kato-truncated";
    }
    return "none";
}

Potential PotentialDescriptor::make(const ConvexDomain& domain, double h) const {
    switch (type) {
    case Type::None: return {};
    case Type::Constant: {
        const double c = value;
        return [c](std::span<const double>) { return c; };
    }
    case Type::Quadratic: {
        const Point c0 = center.value_or(domain.chebyshev_center());
        const double a = scale;
        return [c0, a](std::span<const double> x) {
            double r2 = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) r2 += (x[j] - c0[j]) * (x[j] - c0[j]);
            return a * r2;
        };
    }
    case Type::Well: return well(domain).potential();
    case Type::KatoTruncated: {
        Point c0 = center.value_or(domain.chebyshev_center());
        if (!center) {
            for (double& c : c0) c += 0.5 * h;
        }
        const double g = gamma, s = strength, m = cap;
        return [c0, g, s, m](std::span<const double> x) {
            double r2 = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) r2 += (x[j] - c0[j]) * (x[j] - c0[j]);
            const double v = std::pow(r2, -0.5 * g);
            return s * (m > 0.0 ? std::min(v, m) : v);
        };
    }
    }
    return {};
}

double PotentialDescriptor::sup_abs(const ConvexDomain& domain) const {
    switch (type) {
    case Type::None: return 0.0;
    case Type::Constant: return std::abs(value);
    case Type::Quadratic: {
        const Point c0 = center.value_or(domain.chebyshev_center());
        const auto [lo, hi] = domain.bounding_box();
        double r2 = 0.0;
        for (std::size_t j = 0; j < c0.size(); ++j) {
            const double far = std::max(std::abs(lo[j] - c0[j]), std::abs(hi[j] - c0[j]));
            r2 += far * far;
        }
        return std::abs(scale) * r2;
    }
    case Type::Well: return depth;
    case Type::KatoTruncated:
        return cap > 0.0 ? std::abs(strength) * cap : std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

bool PotentialDescriptor::convex() const {
    return type == Type::None || type == Type::Constant || (type == Type::Quadratic && scale >= 0.0);
}

WellSpec PotentialDescriptor::well(const ConvexDomain& domain) const {
    if (type != Type::Well) throw PreconditionError("potential is not a well");
    WellSpec w{support ? *support : domain.scaled(0.5).translated([&] {
                   Point shift = domain.chebyshev_center();
                   for (double& s : shift) s *= 0.5;
                   return shift;
               }()),
               depth, WellSpec::Shape::Indicator, {}};
    return w;
}

std::string PotentialDescriptor::label() const {
    switch (type) {
    case Type::None: return "none";
    case Type::Constant: return fmt::format("constant({:g})", value);
    case Type::Quadratic: return fmt::format("quadratic({:g})", scale);
    case Type::Well: return fmt::format("well({:g})", depth);
    case Type::KatoTruncated: return fmt::format("kato({:g},{:g})", gamma, strength);
    }
    return "none";
}

json to_json(const PotentialDescriptor& p) {
    json j{{"type", std::string(to_string(p.type))}};
    switch (p.type) {
    case PotentialDescriptor::Type::None: break;
    case PotentialDescriptor::Type::Constant: j["value"] = p.value; break;
    case PotentialDescriptor::Type::Quadratic: j["scale"] = p.scale; break;
    case PotentialDescriptor::Type::Well:
        j["depth"] = p.depth;
        if (p.support) j["support"] = to_json(*p.support);
        break;
    case PotentialDescriptor::Type::KatoTruncated:
        j["gamma"] = p.gamma;
        j["strength"] = p.strength;
        if (p.cap > 0.0) j["cap"] = p.cap;
        break;
    }
    if (p.center) j["center"] = *p.center;
    return j;
}

PotentialDescriptor potential_from_json(const json& j, const std::string& path) {
    reject_unknown(j, path, {"type", "value", "scale", "depth", "support", "gamma", "strength", "cap", "center"});
    const json& t = field(j, "type", path);
    if (!t.is_string()) throw UsageError(path + ".type: expected a string");
    const std::string type = t.get<std::string>();
    PotentialDescriptor p;
    if (type == "none") {
        p.type = PotentialDescriptor::Type::None;
    } else if (type == "constant") {
        p.type = PotentialDescriptor::Type::Constant;
        p.value = number(j, "value", path);
    } else if (type == "quadratic") {
        p.type = PotentialDescriptor::Type::Quadratic;
        p.scale = number_or(j, "scale", path, 1.0);
    } else if (type == "well") {
        p.type = PotentialDescriptor::Type::Well;
        p.depth = number(j, "depth", path);
        if (!(p.depth > 0.0)) throw UsageError(path + ".depth: must be > 0");
        if (j.contains("support")) p.support = domain_from_json(j.at("support"), path + ".support");
    } else if (type == "kato-truncated") {
        p.type = PotentialDescriptor::Type::KatoTruncated;
        p.gamma = number(j, "gamma", path);
        p.strength = number_or(j, "strength", path, 1.0);
        p.cap = number_or(j, "cap", path, 0.0);
        if (!(p.gamma > 0.0)) throw UsageError(path + ".gamma: must be > 0");
    } else {
        throw UsageError(fmt::format("{}.type: unknown potential type '{}'", path, type));
    }
    if (j.contains("center")) p.center = number_list(j.at("center"), path + ".center");
    return p;
}

const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> names{
        "extremum_bound", "faber_krahn",  "survival_lower",        "moment_bounds",
        "exit_sandwich",  "hotspot",      "sublevel_localization", "well_support",
        "well_interior",  "nogo",         "torsion_comparison",    "kappa_shell"};
    return names;
}

ExperimentConfig config_from_json(const json& j, const std::string& path) {
    reject_unknown(j, path, {"schema_version", "spec", "domain", "potential", "grid", "mc", "eigen", "checks",
                             "output", "t_grid", "p_list", "kappa", "rho2", "label"});
    ExperimentConfig c;
    const json& sv = field(j, "schema_version", path);
    if (!sv.is_number_integer() || sv.get<int>() != 1) {
        throw UsageError(path + ".schema_version: unsupported version (expected 1)");
    }
    c.spec = spec_from_json(field(j, "spec", path), path + ".spec");
    c.domain = domain_from_json(field(j, "domain", path), path + ".domain");
    if (j.contains("potential")) c.potential = potential_from_json(j.at("potential"), path + ".potential");
    if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"), path + ".grid");
    if (j.contains("mc")) c.mc = mc_from_json(j.at("mc"), path + ".mc");
    if (j.contains("eigen")) {
        const json& e = j.at("eigen");
        reject_unknown(e, path + ".eigen", {"k"});
        c.k = static_cast<int>(unsigned_or(e, "k", path + ".eigen", 5));
        if (c.k < 1 || c.k > 64) throw UsageError(path + ".eigen.k: must lie in [1, 64]");
    }
    if (j.contains("checks")) {
        const json& cl = j.at("checks");
        if (!cl.is_array()) throw UsageError(path + ".checks: expected an array of names");
        for (std::size_t i = 0; i < cl.size(); ++i) {
            const std::string p = fmt::format("{}.checks[{}]", path, i);
            if (!cl[i].is_string()) throw UsageError(p + ": expected a string");
            const std::string name = cl[i].get<std::string>();
            const auto& known = known_checks();
            if (std::find(known.begin(), known.end(), name) == known.end()) {
                throw UsageError(fmt::format("{}: unknown check '{}'", p, name));
            }
            c.checks.push_back(name);
        }
    }
    if (j.contains("output")) {
        if (!j.at("output").is_string()) throw UsageError(path + ".output: expected a string");
        c.output = j.at("output").get<std::string>();
    }
    if (j.contains("t_grid")) c.t_grid = number_list(j.at("t_grid"), path + ".t_grid");
    if (j.contains("p_list")) c.p_list = number_list(j.at("p_list"), path + ".p_list");
    if (j.contains("kappa")) c.kappa = number(j, "kappa", path);
    c.rho2 = number_or(j, "rho2", path, c.rho2);
    if (j.contains("label")) {
        if (!j.at("label").is_string()) throw UsageError(path + ".label: expected a string");
        c.label = j.at("label").get<std::string>();
    }
    if (c.potential.center && static_cast<int>(c.potential.center->size()) != c.domain.dimension()) {
        throw UsageError(path + ".potential.center: dimension does not match the domain");
    }
    if (c.potential.support && c.potential.support->dimension() != c.domain.dimension()) {
        throw UsageError(path + ".potential.support: dimension does not match the domain");
    }
    return c;
}

json to_json(const ExperimentConfig& c) {
    json j{{"schema_version", c.schema_version},
           {"spec", to_json(c.spec)},
           {"domain", to_json(c.domain)},
           {"potential", to_json(c.potential)},
           {"grid", grid_to_json(c.grid)},
           {"mc", to_json(c.mc)},
           {"eigen", {{"k", c.k}}},
           {"checks", c.checks},
           {"t_grid", c.t_grid},
           {"p_list", c.p_list},
           {"rho2", c.rho2}};
    if (!c.output.empty()) j["output"] = c.output;
    if (c.kappa) j["kappa"] = *c.kappa;
    if (!c.label.empty()) j["label"] = c.label;
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw UsageError(fmt::format("config file '{}' cannot be opened", file.string()));
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError(fmt::format("config file '{}': {}", file.string(), e.what()));
    }
    return config_from_json(j);
}

int exit_code_for(const std::vector<BoundReport>& reports) {
    return std::any_of(reports.begin(), reports.end(), [](const BoundReport& r) { return r.counts_as_failure(); }) ? 1 : 0;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
    const auto has = [&](const char* name) {
        return std::find(cfg.checks.begin(), cfg.checks.end(), name) != cfg.checks.end();
    };
    auto grid = with_context("spectral", [&] {
        return std::make_shared<const GridDomain>(GridDomain::build(cfg.domain, cfg.grid));
    });
    const double h = grid->h();
    const DiscreteOperator free_op = with_context("spectral", [&] { return assemble_operator(grid, cfg.spec); });
    const Potential v = cfg.potential.make(cfg.domain, h);
    const DiscreteOperator op = v ? add_potential(free_op, v) : free_op;
    const int k = std::min<int>(cfg.k, static_cast<int>(op.size()));
    const auto pairs = with_context("spectral", [&] { return eigensolve(op, k); });
    const PotentialStats stats = potential_stats(op);
    const double theta = theta_constant().theta;

    // Free-problem quantities, computed on demand.
    std::optional<std::vector<EigenPair>> free_pairs;
    auto free_pair = [&]() -> const EigenPair& {
        if (!free_pairs) free_pairs = v ? eigensolve(free_op, 1) : std::vector<EigenPair>{pairs.front()};
        return free_pairs->front();
    };
    std::optional<Eigen::VectorXd> torsion_vec;
    auto torsion_v = [&]() -> const Eigen::VectorXd& {
        if (!torsion_vec) torsion_vec = with_context("spectral", [&] { return torsion(free_op); });
        return *torsion_vec;
    };
    auto candidates = [&] {
        Eigen::Index arg = 0;
        torsion_v().maxCoeff(&arg);
        const Point extra[1] = {grid->point(static_cast<std::size_t>(arg))};
        return sup_candidates(cfg.domain, extra);
    };

    std::vector<BoundReport> reports;
    std::vector<McEstimate> survival;
    auto add = [&](BoundReport r) {
        r.label = cfg.label;
        if (r.provenance.kind == "deterministic") {
            r.provenance.h = h;
            r.provenance.n_per_axis = cfg.grid.n_per_axis;
        }
        reports.push_back(std::move(r));
    };

    if (has("extremum_bound")) {
        for (const auto& p : pairs) add(check_extremum_bound(p, cfg.spec, cfg.domain, stats, theta, h));
    }
    if (has("faber_krahn")) {
        for (const auto& p : pairs) add(check_faber_krahn(p, cfg.spec, cfg.domain, stats, theta));
    }
    if (has("survival_lower")) {
        const double bound = cfg.potential.sup_abs(cfg.domain);
        if (!has_sampler(cfg.spec)) {
            add(skipped("survival_lower", "no subordinator sampler for this Bernstein function"));
        } else if (!std::isfinite(bound)) {
            add(skipped("survival_lower", "potential is unbounded on the domain"));
        } else {
            for (auto& r : check_survival_lower(pairs.front(), cfg.spec, cfg.domain, v, bound, cfg.t_grid, cfg.mc)) {
                add(std::move(r));
            }
        }
    }
    if (has("moment_bounds")) {
        if (!has_sampler(cfg.spec)) {
            add(skipped("moment_bounds", "no subordinator sampler for this Bernstein function"));
        } else {
            const auto cand = candidates();
            for (auto& r : check_moment_bounds(free_pair().lambda, cfg.spec, cfg.domain, cfg.p_list, cand, cfg.mc)) {
                add(std::move(r));
            }
        }
    }
    if (has("exit_sandwich")) {
        if (!has_sampler(cfg.spec)) {
            add(skipped("exit_sandwich", "no subordinator sampler for this Bernstein function"));
        } else {
            const auto cand = candidates();
            add(check_exit_sandwich(cfg.spec, cfg.domain, cand, cfg.mc));
        }
    }
    if (has("hotspot")) {
        const bool classical = cfg.spec.kind == BernsteinKind::Linear && cfg.spec.drift == 0.0;
        if (classical && !v) {
            add(check_hotspot(pairs.front(), cfg.domain, theta, h));
        } else {
            const auto lin = eigensolve(assemble_operator(grid, BernsteinSpec::linear()), 1);
            BoundReport r = check_hotspot(lin.front(), cfg.domain, theta, h);
            r.note = "classical Laplacian on the same grid";
            add(std::move(r));
        }
    }
    if (has("sublevel_localization")) {
        if (cfg.potential.convex()) {
            add(check_sublevel_localization(pairs.front(), v, cfg.domain, h, cfg.mc.seed));
        } else {
            add(skipped("sublevel_localization", "potential is not convex"));
        }
    }
    const bool is_well = cfg.potential.type == PotentialDescriptor::Type::Well;
    if (has("well_support")) {
        add(is_well ? check_well_support(pairs.front(), cfg.potential.well(cfg.domain), h)
                    : skipped("well_support", "potential is not a well"));
    }
    if (has("well_interior")) {
        add(is_well ? check_well_interior(pairs.front(), cfg.potential.well(cfg.domain), cfg.spec, h)
                    : skipped("well_interior", "potential is not a well"));
    }
    if (has("nogo")) {
        if (is_well) {
            std::vector<double> lambdas;
            for (const auto& p : pairs) lambdas.push_back(p.lambda);
            add(check_nogo(cfg.potential.well(cfg.domain), cfg.spec, lambdas, cfg.rho2));
        } else {
            add(skipped("nogo", "potential is not a well"));
        }
    }
    if (has("torsion_comparison")) add(check_torsion_comparison(torsion_v(), free_pair()));
    if (has("kappa_shell")) {
        if (!is_well) {
            add(skipped("kappa_shell", "needs a compactly supported potential (well)"));
        } else {
            const WellSpec w = cfg.potential.well(cfg.domain);
            const auto kappa = cfg.kappa ? cfg.kappa : box_gap(cfg.domain, w.support);
            add(kappa ? check_kappa_shell_bound(pairs.front(), cfg.spec, cfg.domain, w.support, *kappa)
                      : skipped("kappa_shell", "kappa not given and not derivable for this domain"));
        }
    }

    std::stable_sort(reports.begin(), reports.end(),
                     [](const BoundReport& a, const BoundReport& b) { return a.name < b.name; });

    RunResult result;
    result.exit_code = exit_code_for(reports);
    json eig = json::array();
    for (const auto& p : pairs) {
        eig.push_back({{"k", p.index},
                       {"lambda", p.lambda},
                       {"x_star", p.x_star},
                       {"r_star", p.r_star},
                       {"tie_count", p.tie_count},
                       {"residual", p.residual}});
    }
    json reps = json::array();
    for (const auto& r : reports) reps.push_back(to_json(r));
    result.summary = {{"config", to_json(cfg)},
                      {"grid", to_json(*grid)},
                      {"theta", theta},
                      {"potential_stats", {{"v_minus_sup", stats.v_minus_sup}, {"v_plus_inf", stats.v_plus_inf}}},
                      {"eigenpairs", eig},
                      {"reports", reps},
                      {"exit_code", result.exit_code}};
    if (torsion_vec) result.summary["torsion_max"] = torsion_vec->maxCoeff();
    result.reports = std::move(reports);

    if (!cfg.output.empty()) {
        const std::string prefix = cfg.output;
        write_file_atomic(prefix + "_report.json", dump_json(result.summary));
        write_file_atomic(prefix + "_reports.csv", reports_csv(result.reports));
        std::vector<std::string> names;
        std::vector<const Eigen::VectorXd*> cols;
        for (const auto& p : pairs) {
            names.push_back(fmt::format("phi{}", p.index));
            cols.push_back(&p.phi);
        }
        if (torsion_vec) {
            names.push_back("torsion");
            cols.push_back(&*torsion_vec);
        }
        write_file_atomic(prefix + "_profiles.csv", grid_vectors_csv(*grid, names, cols));
        std::string curves = "name,x,y\n";
        bool any_curve = false;
        for (const auto& r : result.reports) {
            for (const auto& [x, y] : r.curve) {
                curves += fmt::format("{},{:.17g},{:.17g}\n", r.name, x, y);
                any_curve = true;
            }
            const auto t = r.extras.find("t");
            const auto s = r.extras.find("survival");
            if (t != r.extras.end() && s != r.extras.end()) {
                curves += fmt::format("survival,{:.17g},{:.17g}\n", t->second, s->second);
                any_curve = true;
            }
        }
        if (any_curve) write_file_atomic(prefix + "_curves.csv", curves);
    }
    return result;
}

RunResult run_battery(const json& m, const std::filesystem::path& out_dir) {
    const std::string path = "manifest";
    reject_unknown(m, path, {"schema_version", "specs", "domains", "potentials", "grid", "eigen", "checks",
                             "free_checks", "mc", "p_list", "description"});
    const json& sv = field(m, "schema_version", path);
    if (!sv.is_number_integer() || sv.get<int>() != 1) throw UsageError(path + ".schema_version: expected 1");

    std::vector<BernsteinSpec> specs;
    const json& sj = field(m, "specs", path);
    if (!sj.is_array() || sj.empty()) throw UsageError(path + ".specs: expected a nonempty array");
    for (std::size_t i = 0; i < sj.size(); ++i) specs.push_back(spec_from_json(sj[i], fmt::format("{}.specs[{}]", path, i)));

    struct DomainEntry {
        std::string label;
        ConvexDomain domain;
        GridSpec grid;
        PathConfig mc;
    };
    const GridSpec base_grid = m.contains("grid") ? grid_from_json(m.at("grid"), path + ".grid") : GridSpec{};
    const PathConfig base_mc = m.contains("mc") ? mc_from_json(m.at("mc"), path + ".mc") : PathConfig{};
    std::vector<DomainEntry> domains;
    const json& dj = field(m, "domains", path);
    if (!dj.is_array() || dj.empty()) throw UsageError(path + ".domains: expected a nonempty array");
    for (std::size_t i = 0; i < dj.size(); ++i) {
        const std::string p = fmt::format("{}.domains[{}]", path, i);
        reject_unknown(dj[i], p, {"label", "domain", "grid", "mc"});
        DomainEntry e{dj[i].value("label", fmt::format("domain{}", i)), domain_from_json(field(dj[i], "domain", p), p + ".domain"),
                      base_grid, base_mc};
        if (dj[i].contains("grid")) {
            json g = grid_to_json(base_grid);
            g.update(dj[i].at("grid"));
            e.grid = grid_from_json(g, p + ".grid");
        }
        if (dj[i].contains("mc")) {
            json c = to_json(base_mc);
            c.update(dj[i].at("mc"));
            e.mc = mc_from_json(c, p + ".mc");
        }
        domains.push_back(std::move(e));
    }
    std::vector<PotentialDescriptor> potentials;
    const json& pj = field(m, "potentials", path);
    if (!pj.is_array()) throw UsageError(path + ".potentials: expected an array");
    for (std::size_t i = 0; i < pj.size(); ++i) potentials.push_back(potential_from_json(pj[i], fmt::format("{}.potentials[{}]", path, i)));

    auto names = [&](const char* key) {
        std::vector<std::string> out;
        if (!m.contains(key)) return out;
        json wrapper{{"schema_version", 1}, {"spec", {{"kind", "linear"}}}, {"domain", {{"type", "interval"}, {"a", -1}, {"b", 1}}},
                     {"checks", m.at(key)}};
        return config_from_json(wrapper, path + "." + key).checks;
    };
    const auto checks = names("checks");
    const auto free_checks = names("free_checks");
    int k = 5;
    if (m.contains("eigen")) k = static_cast<int>(unsigned_or(m.at("eigen"), "k", path + ".eigen", 5));
    std::vector<double> p_list{1.0, 2.0, 3.0};
    if (m.contains("p_list")) p_list = number_list(m.at("p_list"), path + ".p_list");

    std::vector<BoundReport> all;
    json configs = json::array();
    std::set<int> dims;
    for (const auto& spec : specs) {
        for (const auto& d : domains) {
            dims.insert(d.domain.dimension());
            auto base = [&] {
                ExperimentConfig c;
                c.spec = spec;
                c.domain = d.domain;
                c.grid = d.grid;
                c.mc = d.mc;
                c.k = k;
                c.p_list = p_list;
                return c;
            };
            if (!free_checks.empty()) {
                ExperimentConfig c = base();
                c.checks = free_checks;
                c.label = fmt::format("{}|{}|free", describe(spec), d.label);
                auto r = run_experiment(c);
                configs.push_back({{"label", c.label}, {"eigenpairs", r.summary["eigenpairs"]}});
                all.insert(all.end(), r.reports.begin(), r.reports.end());
            }
            for (const auto& pot : potentials) {
                ExperimentConfig c = base();
                c.potential = pot;
                c.checks = checks;
                c.label = fmt::format("{}|{}|{}", describe(spec), d.label, pot.label());
                auto r = run_experiment(c);
                configs.push_back({{"label", c.label}, {"eigenpairs", r.summary["eigenpairs"]}});
                all.insert(all.end(), r.reports.begin(), r.reports.end());
            }
        }
    }
    if (std::find(free_checks.begin(), free_checks.end(), "exit_sandwich") != free_checks.end()) {
        std::vector<BoundReport> sandwiches;
        for (const auto& r : all) {
            if (r.name == "exit_sandwich") sandwiches.push_back(r);
        }
        for (int d : dims) {
            BoundReport s = check_exit_sandwich_spread(sandwiches, d);
            s.label = "battery";
            all.push_back(std::move(s));
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const BoundReport& a, const BoundReport& b) {
        return std::tie(a.label, a.name) < std::tie(b.label, b.name);
    });

    RunResult result;
    result.exit_code = exit_code_for(all);
    std::map<std::string, int> counts;
    for (const auto& r : all) ++counts[std::string(to_string(r.status))];
    json reps = json::array();
    for (const auto& r : all) reps.push_back(to_json(r));
    result.summary = {{"manifest", m},
                      {"configurations", configs},
                      {"status_counts", counts},
                      {"reports", reps},
                      {"exit_code", result.exit_code}};
    result.reports = std::move(all);
    if (!out_dir.empty()) {
        write_file_atomic(out_dir / "battery_report.json", dump_json(result.summary));
        write_file_atomic(out_dir / "battery_reports.csv", reports_csv(result.reports));
    }
    return result;
}

RunResult run_battery_file(const std::filesystem::path& manifest, const std::filesystem::path& out_dir) {
    std::ifstream in(manifest);
    if (!in) throw UsageError(fmt::format("manifest '{}' cannot be opened", manifest.string()));
    json m;
    try {
        m = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError(fmt::format("manifest '{}': {}", manifest.string(), e.what()));
    }
    return run_battery(m, out_dir);
}

}  // namespace nlx
