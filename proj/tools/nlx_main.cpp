// nlx: command-line front end (theta, eigensolve, exit-time, verify, battery).

#include "nlx/bernstein.hpp"
#include "nlx/errors.hpp"
#include "nlx/experiment.hpp"
#include "nlx/io.hpp"
#include "nlx/spectral.hpp"
#include "nlx/subordination.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <iostream>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct SpecArgs {
    std::string kind = "linear";
    double alpha = 2.0;
    double beta = 0.0;
    double mass = 0.0;
    double drift = 0.0;

    void add(CLI::App* app) {
        app->add_option("--spec", kind, "Bernstein function kind")->capture_default_str();
        app->add_option("--alpha", alpha, "stability index alpha");
        app->add_option("--beta", beta, "second index beta");
        app->add_option("--mass", mass, "relativistic mass m");
        app->add_option("--drift", drift, "linear drift coefficient");
    }

    nlx::BernsteinSpec build() const {
        nlx::json j{{"kind", kind}};
        const auto k = nlx::bernstein_kind_from_string(kind);
        if (k != nlx::BernsteinKind::Linear) j["alpha"] = alpha;
        if (k == nlx::BernsteinKind::SumOfStables || k == nlx::BernsteinKind::LogWeighted ||
            k == nlx::BernsteinKind::LogDamped) {
            j["beta"] = beta;
        }
        if (k == nlx::BernsteinKind::Relativistic) j["m"] = mass;
        if (drift != 0.0) j["drift"] = drift;
        return nlx::spec_from_json(j, "--spec");
    }
};

std::vector<double> parse_point(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        const std::string token = text.substr(start, end - start);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != token.size()) throw nlx::UsageError(fmt::format("--x0: '{}' is not a number", token));
        out.push_back(v);
        start = end + 1;
    }
    return out;
}

void print_reports(const std::vector<nlx::BoundReport>& reports) {
    for (const auto& r : reports) {
        fmt::print("{:<13} {:<40} lhs={:<14.8g} rhs={:<14.8g} slack={:<14.6g} tol={:.3g}{}\n",
                   nlx::to_string(r.status), (r.label.empty() ? "" : r.label + " ") + r.name, r.lhs, r.rhs,
                   r.slack, r.tolerance, r.note.empty() ? "" : "  # " + r.note);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlocal Schroedinger operators: spectra, exit times and bound checks"};
    app.require_subcommand(1);

    // theta
    auto* theta_cmd = app.add_subcommand("theta", "Universal constant theta and its maximizer kappa*");
    double scan_lo = 1.0, scan_hi = 40.0;
    theta_cmd->add_option("--scan-lo", scan_lo, "lower end of the kappa scan");
    theta_cmd->add_option("--scan-hi", scan_hi, "upper end of the kappa scan");

    // eigensolve
    auto* eig_cmd = app.add_subcommand("eigensolve", "Lowest Dirichlet eigenpairs of Psi(-Laplacian)");
    SpecArgs eig_spec;
    eig_spec.add(eig_cmd);
    std::string eig_domain = "interval:-1,1";
    std::size_t eig_n = 256;
    double eig_embed = 4.0;
    int eig_k = 1;
    std::string eig_output;
    eig_cmd->add_option("--domain", eig_domain, "interval:a,b | box:lo,hi,... | ball:c...,r")->capture_default_str();
    eig_cmd->add_option("--n-per-axis", eig_n, "lattice points across the embedding box")->capture_default_str();
    eig_cmd->add_option("--embed-factor", eig_embed, "embedding box / domain extent")->capture_default_str();
    eig_cmd->add_option("-k,--k", eig_k, "number of eigenpairs")->capture_default_str();
    eig_cmd->add_option("--output", eig_output, "path prefix for JSON and CSV output");

    // exit-time
    auto* exit_cmd = app.add_subcommand("exit-time", "Monte Carlo moments of the first exit time");
    SpecArgs exit_spec;
    exit_spec.add(exit_cmd);
    std::string exit_domain = "interval:-1,1";
    std::string exit_x0 = "0";
    nlx::PathConfig exit_cfg;
    double exit_p = 1.0;
    int exit_levels = 1;
    std::string dump_paths;
    exit_cmd->add_option("--domain", exit_domain, "interval:a,b | box:lo,hi,... | ball:c...,r")->capture_default_str();
    exit_cmd->add_option("--x0", exit_x0, "start point, comma separated")->capture_default_str();
    exit_cmd->add_option("--paths", exit_cfg.n_paths, "number of paths")->capture_default_str();
    exit_cmd->add_option("--dt", exit_cfg.dt, "time step")->capture_default_str();
    exit_cmd->add_option("--horizon", exit_cfg.horizon, "censoring horizon")->capture_default_str();
    exit_cmd->add_option("--seed", exit_cfg.seed, "RNG seed")->capture_default_str();
    exit_cmd->add_option("--workers", exit_cfg.workers, "worker threads (0 = all cores)");
    exit_cmd->add_option("--p", exit_p, "moment order")->capture_default_str();
    exit_cmd->add_option("--levels", exit_levels, "dt refinement levels dt, dt/2, ...")->capture_default_str();
    exit_cmd->add_option("--dump-paths", dump_paths, "CSV file for per-path exit times");

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "Run the checks of one experiment config");
    std::string config_path, verify_output;
    verify_cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
    verify_cmd->add_option("--output", verify_output, "override the config's output prefix");

    // battery
    auto* battery_cmd = app.add_subcommand("battery", "Run a battery manifest");
    std::string manifest = "configs/battery.json", battery_output;
    battery_cmd->add_option("--manifest", manifest, "battery manifest (JSON)")->capture_default_str();
    battery_cmd->add_option("--output", battery_output, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (theta_cmd->parsed()) {
            const auto t = nlx::theta_constant(scan_lo, scan_hi);
            fmt::print("theta = {:.10f}\nkappa* = {:.10f}\nF(-1) = {:.10f}\n", t.theta, t.kappa_star, t.f_minus_one);
            return 0;
        }
        if (eig_cmd->parsed()) {
            nlx::ExperimentConfig c;
            c.spec = eig_spec.build();
            c.domain = nlx::parse_domain_arg(eig_domain);
            c.grid.n_per_axis = eig_n;
            c.grid.embed_factor = eig_embed;
            c.k = eig_k;
            c.output = eig_output;
            const auto r = nlx::run_experiment(c);
            std::cout << nlx::dump_json(nlx::json{{"grid", r.summary["grid"]}, {"eigenpairs", r.summary["eigenpairs"]}});
            return 0;
        }
        if (exit_cmd->parsed()) {
            const auto spec = exit_spec.build();
            const auto domain = nlx::parse_domain_arg(exit_domain);
            const auto x0 = parse_point(exit_x0);
            if (static_cast<int>(x0.size()) != domain.dimension()) throw nlx::UsageError("--x0: dimension does not match --domain");
            try {
                nlx::validate(exit_cfg);
            } catch (const nlx::ParameterDomainError& e) {
                throw nlx::UsageError(e.what());
            }
            const auto sample = nlx::sample_exit_times(spec, domain, x0, exit_cfg, exit_levels);
            nlx::json out = nlx::json::array();
            for (int l = 0; l < exit_levels; ++l) {
                const auto est = nlx::exit_moment_from_sample(sample, exit_p, l, exit_cfg.seed);
                nlx::json params{{"x0", x0}, {"p", exit_p}, {"dt", sample.dts[static_cast<std::size_t>(l)]},
                                 {"horizon", exit_cfg.horizon}};
                out.push_back(nlx::mc_record("exit_moment", spec, domain, params, est));
            }
            if (!dump_paths.empty()) {
                std::string csv = "path";
                for (double dt : sample.dts) csv += fmt::format(",tau_dt{:g}", dt);
                csv += '\n';
                for (std::size_t i = 0; i < exit_cfg.n_paths; ++i) {
                    csv += std::to_string(i);
                    for (const auto& lvl : sample.exit_times) csv += fmt::format(",{:.17g}", lvl[i]);
                    csv += '\n';
                }
                nlx::write_file_atomic(dump_paths, csv);
            }
            std::cout << nlx::dump_json(exit_levels == 1 ? out[0] : out);
            return 0;
        }
        if (verify_cmd->parsed()) {
            auto c = nlx::load_config(config_path);
            if (!verify_output.empty()) c.output = verify_output;
            const auto r = nlx::run_experiment(c);
            print_reports(r.reports);
            fmt::print("exit code {}\n", r.exit_code);
            return r.exit_code;
        }
        if (battery_cmd->parsed()) {
            const auto r = nlx::run_battery_file(manifest, battery_output);
            print_reports(r.reports);
            fmt::print("{} reports, status counts {}\n", r.reports.size(), r.summary["status_counts"].dump());
            return r.exit_code;
        }
    } catch (const nlx::UsageError& e) {
        fmt::print(stderr, "usage error: {}\n", e.what());
        return kExitUsage;
    } catch (const nlx::ParameterDomainError& e) {
        fmt::print(stderr, "parameter error: {}\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitRuntime;
    }
    return 0;
}
