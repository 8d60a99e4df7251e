#pragma once

#include "nlx/bernstein.hpp"
#include "nlx/bounds.hpp"
#include "nlx/domain.hpp"
#include "nlx/spectral.hpp"
#include "nlx/subordination.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nlx {

using json = nlohmann::json;

json to_json(const BernsteinSpec& spec);
json to_json(const ConvexDomain& domain);
json to_json(const PathConfig& cfg);
json to_json(const McEstimate& est);
json to_json(const BoundReport& rep);
json to_json(const ThetaResult& theta);
json to_json(const GridDomain& grid);

/// Record {op, spec, domain, params, mean, stderr, n, seed, ...} for a Monte Carlo estimate.
json mc_record(std::string_view op, const BernsteinSpec& spec, const ConvexDomain& domain,
               const json& params, const McEstimate& est);

/// Parsers throw UsageError naming the offending field path (e.g. "config.spec.alpha").
BernsteinSpec spec_from_json(const json& j, const std::string& path);
ConvexDomain domain_from_json(const json& j, const std::string& path);

/// "interval:a,b", "box:lo1,hi1,lo2,hi2,...", "ball:c1,...,cd,r".
ConvexDomain parse_domain_arg(std::string_view text);

/// CSV of reports with one row per report.
std::string reports_csv(const std::vector<BoundReport>& reports);

/// CSV with header x1..xd followed by one column per vector.
std::string grid_vectors_csv(const GridDomain& grid, const std::vector<std::string>& names,
                             const std::vector<const Eigen::VectorXd*>& columns);

/// Deterministic text of a JSON value (sorted keys, two-space indent, trailing newline).
std::string dump_json(const json& j);

/// Writes via a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace nlx
