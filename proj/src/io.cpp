#include "nlx/io.hpp"

#include "nlx/errors.hpp"

#include <fmt/format.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace nlx {

namespace {

std::string num(double x) { return fmt::format("{:.17g}", x); }

const json& field(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) throw UsageError(fmt::format("{}: expected an object", path));
    const auto it = j.find(key);
    if (it == j.end()) throw UsageError(fmt::format("{}.{}: required field missing", path, key));
    return *it;
}

double number_at(const json& j, const std::string& path) {
    if (!j.is_number()) throw UsageError(fmt::format("{}: expected a number", path));
    return j.get<double>();
}

double number_field(const json& j, const char* key, const std::string& path) {
    return number_at(field(j, key, path), path + "." + key);
}

double number_field_or(const json& j, const char* key, const std::string& path, double fallback) {
    return j.contains(key) ? number_field(j, key, path) : fallback;
}

Point point_at(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw UsageError(fmt::format("{}: expected a nonempty array of numbers", path));
    Point p;
    for (std::size_t i = 0; i < j.size(); ++i) p.push_back(number_at(j[i], fmt::format("{}[{}]", path, i)));
    return p;
}

std::string string_field(const json& j, const char* key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_string()) throw UsageError(fmt::format("{}.{}: expected a string", path, key));
    return v.get<std::string>();
}

template <typename F>
auto rethrow_as_usage(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const UsageError&) {
        throw;
    } catch (const Error& e) {
        throw UsageError(fmt::format("{}: {}", path, e.what()));
    }
}

std::vector<double> split_numbers(std::string_view text, std::string_view what) {
    std::vector<double> out;
    std::string token;
    std::istringstream in{std::string(text)};
    while (std::getline(in, token, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != token.size()) throw UsageError(fmt::format("{}: '{}' is not a number", what, token));
        out.push_back(v);
    }
    return out;
}

}  // namespace

json to_json(const BernsteinSpec& spec) {
    json j{{"kind", std::string(to_string(spec.kind))}};
    switch (spec.kind) {
    case BernsteinKind::Linear: break;
    case BernsteinKind::Stable:
    case BernsteinKind::GeometricStable: j["alpha"] = spec.alpha; break;
    case BernsteinKind::Relativistic:
        j["alpha"] = spec.alpha;
        j["m"] = spec.m;
        break;
    case BernsteinKind::SumOfStables:
    case BernsteinKind::LogWeighted:
    case BernsteinKind::LogDamped:
        j["alpha"] = spec.alpha;
        j["beta"] = spec.beta;
        break;
    }
    if (spec.drift != 0.0) j["drift"] = spec.drift;
    return j;
}

BernsteinSpec spec_from_json(const json& j, const std::string& path) {
    const std::string kind_name = string_field(j, "kind", path);
    BernsteinSpec s;
    s.kind = rethrow_as_usage(path + ".kind", [&] { return bernstein_kind_from_string(kind_name); });
    for (const auto& [key, value] : j.items()) {
        if (key != "kind" && key != "alpha" && key != "beta" && key != "m" && key != "drift") {
            throw UsageError(fmt::format("{}.{}: unknown field", path, key));
        }
    }
    const bool needs_alpha = s.kind != BernsteinKind::Linear;
    s.alpha = needs_alpha ? number_field(j, "alpha", path) : 2.0;
    const bool needs_beta = s.kind == BernsteinKind::SumOfStables || s.kind == BernsteinKind::LogWeighted ||
                            s.kind == BernsteinKind::LogDamped;
    s.beta = needs_beta ? number_field(j, "beta", path) : 0.0;
    s.m = s.kind == BernsteinKind::Relativistic ? number_field(j, "m", path) : 0.0;
    s.drift = number_field_or(j, "drift", path, 0.0);
    rethrow_as_usage(path, [&] { validate(s); });
    return s;
}

json to_json(const ConvexDomain& d) {
    switch (d.kind()) {
    case ConvexDomain::Kind::Interval: return {{"type", "interval"}, {"a", d.lo()[0]}, {"b", d.hi()[0]}};
    case ConvexDomain::Kind::Box: return {{"type", "box"}, {"lo", d.lo()}, {"hi", d.hi()}};
    case ConvexDomain::Kind::Ball: return {{"type", "ball"}, {"center", d.center()}, {"radius", d.radius()}};
    case ConvexDomain::Kind::Polytope: {
        json faces = json::array();
        for (const auto& f : d.faces()) faces.push_back({{"normal", f.normal}, {"offset", f.offset}});
        return {{"type", "polytope"}, {"faces", faces}};
    }
    case ConvexDomain::Kind::AllSpace: return {{"type", "all_space"}, {"dimension", d.dimension()}};
    }
    return {};
}

ConvexDomain domain_from_json(const json& j, const std::string& path) {
    const std::string type = string_field(j, "type", path);
    return rethrow_as_usage(path, [&]() -> ConvexDomain {
        if (type == "interval") return ConvexDomain::interval(number_field(j, "a", path), number_field(j, "b", path));
        if (type == "box") {
            return ConvexDomain::box(point_at(field(j, "lo", path), path + ".lo"),
                                     point_at(field(j, "hi", path), path + ".hi"));
        }
        if (type == "ball") {
            return ConvexDomain::ball(point_at(field(j, "center", path), path + ".center"),
                                      number_field(j, "radius", path));
        }
        if (type == "polytope") {
            const json& faces = field(j, "faces", path);
            if (!faces.is_array()) throw UsageError(path + ".faces: expected an array");
            std::vector<Halfspace> hs;
            for (std::size_t i = 0; i < faces.size(); ++i) {
                const std::string fp = fmt::format("{}.faces[{}]", path, i);
                hs.push_back({point_at(field(faces[i], "normal", fp), fp + ".normal"), number_field(faces[i], "offset", fp)});
            }
            return ConvexDomain::polytope(std::move(hs));
        }
        if (type == "all_space") {
            const json& d = field(j, "dimension", path);
            if (!d.is_number_integer() || d.get<int>() < 1) throw UsageError(path + ".dimension: expected an integer >= 1");
            return ConvexDomain::all_space(d.get<int>());
        }
        throw UsageError(fmt::format("{}.type: unknown domain type '{}'", path, type));
    });
}

ConvexDomain parse_domain_arg(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw UsageError(fmt::format("--domain: expected type:numbers, got '{}'", text));
    const std::string_view type = text.substr(0, colon);
    const auto v = split_numbers(text.substr(colon + 1), "--domain");
    return rethrow_as_usage("--domain", [&]() -> ConvexDomain {
        if (type == "interval") {
            if (v.size() != 2) throw UsageError("--domain interval: expected a,b");
            return ConvexDomain::interval(v[0], v[1]);
        }
        if (type == "box") {
            if (v.empty() || v.size() % 2 != 0) throw UsageError("--domain box: expected lo,hi pairs");
            Point lo, hi;
            for (std::size_t i = 0; i < v.size(); i += 2) {
                lo.push_back(v[i]);
                hi.push_back(v[i + 1]);
            }
            return ConvexDomain::box(lo, hi);
        }
        if (type == "ball") {
            if (v.size() < 2) throw UsageError("--domain ball: expected c1,...,cd,r");
            return ConvexDomain::ball(Point(v.begin(), v.end() - 1), v.back());
        }
        throw UsageError(fmt::format("--domain: unknown type '{}'", type));
    });
}

json to_json(const PathConfig& c) {
    return {{"dt", c.dt}, {"horizon", c.horizon}, {"n_paths", c.n_paths}, {"seed", c.seed}};
}

json to_json(const McEstimate& e) {
    json j{{"mean", e.mean}, {"stderr", e.stderr_}, {"n", e.n}, {"seed", e.seed}, {"censored", e.censored}};
    if (e.censoring_warning) j["censoring_warning"] = true;
    if (e.error_flag) j["error_flag"] = true;
    if (e.acceptance_rate != 1.0) j["acceptance_rate"] = e.acceptance_rate;
    if (!e.note.empty()) j["note"] = e.note;
    return j;
}

json mc_record(std::string_view op, const BernsteinSpec& spec, const ConvexDomain& domain,
               const json& params, const McEstimate& est) {
    json j = to_json(est);
    j["op"] = std::string(op);
    j["spec"] = to_json(spec);
    j["domain"] = to_json(domain);
    j["params"] = params;
    return j;
}

json to_json(const BoundReport& r) {
    json prov{{"kind", r.provenance.kind}};
    if (r.provenance.kind == "monte-carlo") {
        prov["stderr"] = r.provenance.stderr_;
        prov["seed"] = r.provenance.seed;
        prov["n_paths"] = r.provenance.n_paths;
        prov["dt"] = r.provenance.dt;
    }
    if (r.provenance.h > 0.0) prov["h"] = r.provenance.h;
    if (r.provenance.n_per_axis > 0) prov["n_per_axis"] = r.provenance.n_per_axis;
    json j{{"name", r.name},        {"lhs", r.lhs},   {"rhs", r.rhs},
           {"slack", r.slack},      {"tolerance", r.tolerance},
           {"pass", r.pass},        {"status", std::string(to_string(r.status))},
           {"provenance", prov}};
    if (!r.label.empty()) j["label"] = r.label;
    if (!r.extras.empty()) j["extras"] = r.extras;
    if (!r.curve.empty()) {
        json c = json::array();
        for (const auto& [x, y] : r.curve) c.push_back({x, y});
        j["curve"] = c;
    }
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

json to_json(const ThetaResult& t) {
    return {{"theta", t.theta}, {"kappa_star", t.kappa_star}, {"f_minus_one", t.f_minus_one}};
}

json to_json(const GridDomain& g) {
    return {{"n_per_axis", g.spec().n_per_axis},
            {"embed_factor", g.spec().embed_factor},
            {"h", g.h()},
            {"interior_points", g.size()},
            {"origin", g.origin()},
            {"embed_lo", g.embed_lo()},
            {"embed_hi", g.embed_hi()},
            {"fft_size", g.fft_size()}};
}

std::string reports_csv(const std::vector<BoundReport>& reports) {
    std::string out = "label,name,status,pass,lhs,rhs,slack,tolerance,provenance,stderr,seed\n";
    for (const auto& r : reports) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.label, r.name, to_string(r.status),
                           r.pass ? 1 : 0, num(r.lhs), num(r.rhs), num(r.slack), num(r.tolerance),
                           r.provenance.kind, num(r.provenance.stderr_), r.provenance.seed);
    }
    return out;
}

std::string grid_vectors_csv(const GridDomain& grid, const std::vector<std::string>& names,
                             const std::vector<const Eigen::VectorXd*>& columns) {
    std::string out;
    for (int j = 0; j < grid.dimension(); ++j) out += fmt::format("{}x{}", j == 0 ? "" : ",", j + 1);
    for (const auto& n : names) out += "," + n;
    out += '\n';
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point x = grid.point(i);
        for (std::size_t j = 0; j < x.size(); ++j) out += (j == 0 ? "" : ",") + num(x[j]);
        for (const auto* c : columns) out += "," + num((*c)[static_cast<Eigen::Index>(i)]);
        out += '\n';
    }
    return out;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + fmt::format(".tmp{}", static_cast<long>(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(fmt::format("cannot open {} for writing", tmp.string()));
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error(fmt::format("write to {} failed", tmp.string()));
    }
    fs::rename(tmp, path);
}

}  // namespace nlx
