#pragma once

#include "nlx/bounds.hpp"
#include "nlx/io.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nlx {

/// Potential descriptor of an experiment.
///
///   none
///   constant        V = value
///   quadratic       V = scale |x - center|^2   (center defaults to the Chebyshev center)
///   well            V = -depth 1_K             (K defaults to the domain shrunk by 1/2)
///   kato-truncated  V = strength min(|x - center|^-gamma, cap); center defaults to the
///                   Chebyshev center moved half a cell off the lattice
struct PotentialDescriptor {
    enum class Type { None, Constant, Quadratic, Well, KatoTruncated };
    Type type = Type::None;
    double value = 0.0;
    double scale = 1.0;
    double depth = 1.0;
    double gamma = 0.5;
    double strength = 1.0;
    double cap = 0.0;  ///< 0 means no truncation
    std::optional<Point> center;
    std::optional<ConvexDomain> support;

    bool is_none() const { return type == Type::None; }
    /// V as a callback on `domain`; h places the Kato singularity off the lattice.
    Potential make(const ConvexDomain& domain, double h) const;
    /// Upper bound of |V| on `domain` (infinite for an untruncated Kato potential).
    double sup_abs(const ConvexDomain& domain) const;
    bool convex() const;
    WellSpec well(const ConvexDomain& domain) const;
    std::string label() const;
};

std::string_view to_string(PotentialDescriptor::Type t);
json to_json(const PotentialDescriptor& p);
PotentialDescriptor potential_from_json(const json& j, const std::string& path);

struct ExperimentConfig {
    int schema_version = 1;
    BernsteinSpec spec;
    ConvexDomain domain = ConvexDomain::interval(-1.0, 1.0);
    PotentialDescriptor potential;
    GridSpec grid;
    PathConfig mc;
    int k = 5;
    std::vector<std::string> checks;
    std::string output;  ///< path prefix; empty disables file output
    std::vector<double> t_grid{0.1, 0.5};
    std::vector<double> p_list{1.0, 2.0, 3.0};
    std::optional<double> kappa;  ///< distance from the potential support to the boundary
    double rho2 = 1.0;            ///< stand-in constant for the no-go gate
    std::string label;
};

/// Check names accepted in ExperimentConfig::checks.
const std::vector<std::string>& known_checks();

ExperimentConfig config_from_json(const json& j, const std::string& path = "config");
json to_json(const ExperimentConfig& c);
/// Reads and validates a config file; UsageError on missing file, bad JSON or schema violations.
ExperimentConfig load_config(const std::filesystem::path& file);

struct RunResult {
    std::vector<BoundReport> reports;
    json summary;
    int exit_code = 0;  ///< 1 iff some report has status fail
};

/// eigensolve -> extremum -> requested checks -> Monte Carlo estimates. Writes
/// <output>_report.json, <output>_reports.csv and plot-data CSVs when output is set.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Runs every (spec, domain, potential) entry of a battery manifest. Free-problem checks run
/// once per (spec, domain). Writes battery_report.json and battery_reports.csv into out_dir
/// when it is nonempty.
RunResult run_battery(const json& manifest, const std::filesystem::path& out_dir);
RunResult run_battery_file(const std::filesystem::path& manifest, const std::filesystem::path& out_dir);

int exit_code_for(const std::vector<BoundReport>& reports);

}  // namespace nlx
