// Python bindings. Specs, domains and configs cross the boundary as JSON text in the same
// schema the CLI reads; arrays come back as NumPy via the Eigen caster.

#include "nlx/bernstein.hpp"
#include "nlx/errors.hpp"
#include "nlx/experiment.hpp"
#include "nlx/io.hpp"
#include "nlx/spectral.hpp"
#include "nlx/subordination.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace nlx;

namespace {

BernsteinSpec spec_arg(const std::string& text) { return spec_from_json(json::parse(text), "spec"); }
ConvexDomain domain_arg(const std::string& text) { return domain_from_json(json::parse(text), "domain"); }

PathConfig path_config(double dt, double horizon, std::size_t n_paths, std::uint64_t seed, unsigned workers) {
    PathConfig c;
    c.dt = dt;
    c.horizon = horizon;
    c.n_paths = n_paths;
    c.seed = seed;
    c.workers = workers;
    validate(c);
    return c;
}

std::string estimate_text(const McEstimate& e) { return to_json(e).dump(); }

py::dict eigen_result(const DiscreteOperator& op, const std::vector<EigenPair>& pairs) {
    const auto& g = *op.grid;
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(g.size()), g.dimension());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto p = g.point(i);
        for (int j = 0; j < g.dimension(); ++j) pts(static_cast<Eigen::Index>(i), j) = p[static_cast<std::size_t>(j)];
    }
    py::list out;
    for (const auto& p : pairs) {
        py::dict d;
        d["k"] = p.index;
        d["lambda"] = p.lambda;
        d["phi"] = p.phi;
        d["x_star"] = p.x_star;
        d["r_star"] = p.r_star;
        d["tie_count"] = p.tie_count;
        d["residual"] = p.residual;
        out.append(d);
    }
    py::dict r;
    r["h"] = g.h();
    r["points"] = pts;
    r["pairs"] = out;
    return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Nonlocal Schroedinger operators: Bernstein functions, subordinate Brownian motion, spectra";

    py::register_exception<Error>(m, "NlxError", PyExc_RuntimeError);
    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<ParameterDomainError>(m, "ParameterDomainError", PyExc_ValueError);

    m.def("theta", [](double lo, double hi) {
        const auto t = theta_constant(lo, hi);
        return py::make_tuple(t.theta, t.kappa_star, t.f_minus_one);
    }, py::arg("scan_lo") = 1.0, py::arg("scan_hi") = 40.0);
    m.def("theta_kappa", &theta_kappa);
    m.def("eval_psi", [](const std::string& spec, double u) { return eval_psi(spec_arg(spec), u); });
    m.def("invert_psi", [](const std::string& spec, double v) { return invert_psi(spec_arg(spec), v); });
    m.def("mittag_leffler", &mittag_leffler);

    m.def("laplace_transform", [](const std::string& spec, double u, double t, std::size_t n, std::uint64_t seed) {
        py::gil_scoped_release release;
        return estimate_text(estimate_laplace_transform(spec_arg(spec), u, t, n, seed));
    });
    m.def("exit_moment", [](const std::string& spec, const std::string& domain, std::vector<double> x0, double p,
                            double dt, double horizon, std::size_t n_paths, std::uint64_t seed, unsigned workers) {
        const auto cfg = path_config(dt, horizon, n_paths, seed, workers);
        py::gil_scoped_release release;
        return estimate_text(estimate_exit_moment(spec_arg(spec), domain_arg(domain), x0, p, cfg));
    });
    m.def("survival", [](const std::string& spec, const std::string& domain, std::vector<double> x0, double t,
                         double dt, double horizon, std::size_t n_paths, std::uint64_t seed, unsigned workers) {
        const auto cfg = path_config(dt, horizon, n_paths, seed, workers);
        py::gil_scoped_release release;
        return estimate_text(estimate_survival(spec_arg(spec), domain_arg(domain), x0, t, cfg));
    });

    m.def("eigensolve", [](const std::string& spec, const std::string& domain, std::size_t n_per_axis,
                           double embed_factor, int k) {
        GridSpec g;
        g.n_per_axis = n_per_axis;
        g.embed_factor = embed_factor;
        const auto op = assemble_operator(domain_arg(domain), g, spec_arg(spec));
        const auto pairs = eigensolve(op, k);
        return eigen_result(op, pairs);
    });
    m.def("torsion", [](const std::string& spec, const std::string& domain, std::size_t n_per_axis) {
        GridSpec g;
        g.n_per_axis = n_per_axis;
        return torsion(assemble_operator(domain_arg(domain), g, spec_arg(spec)));
    });
    m.def("heat_kernel", [](const std::string& spec, const std::string& domain, std::size_t n_per_axis, double t) {
        GridSpec g;
        g.n_per_axis = n_per_axis;
        return heat_kernel(assemble_operator(domain_arg(domain), g, spec_arg(spec)), t);
    });

    m.def("run_experiment", [](const std::string& config) {
        const auto cfg = config_from_json(json::parse(config));
        RunResult r;
        {
            py::gil_scoped_release release;
            r = run_experiment(cfg);
        }
        json reports = json::array();
        for (const auto& rep : r.reports) reports.push_back(to_json(rep));
        return json{{"exit_code", r.exit_code}, {"reports", reports}, {"summary", r.summary}}.dump();
    });
}
