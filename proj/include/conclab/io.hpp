#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "conclab/concentration.hpp"
#include "conclab/geometry.hpp"
#include "conclab/path.hpp"
#include "conclab/skorokhod.hpp"
#include "conclab/transport.hpp"

namespace conclab {

using Json = nlohmann::json;

/// Shortest-round-trip decimal formatting; identical bytes for identical
/// doubles regardless of thread count or locale.
std::string format_double(double v);

// --- paths ---------------------------------------------------------------

/// CSV with header "time,x1,...,xn", one row per grid point.
std::string path_to_csv(const MultiPath& p);
MultiPath path_from_csv(const std::string& csv);

/// JSON envelope {"grid": {"T": ..., "dt": ...}, "values": [[...], ...]}.
Json path_to_json(const MultiPath& p);
MultiPath path_from_json(const Json& j);

// --- ensembles -----------------------------------------------------------

/// One wide CSV: header "time,m0_x1,..,m0_xn,m1_x1,...".
std::string ensemble_to_wide_csv(const Ensemble& e);

/// One CSV per member, named member_<idx>.csv inside dir; returns filenames.
std::vector<std::string> ensemble_to_member_csvs(const Ensemble& e,
                                                 const std::filesystem::path& dir);

Json seed_lineage_to_json(const SeedLineage& s);

// --- solutions and reports -------------------------------------------------

/// Path envelope extended with pushing, total-variation and per-face
/// local-time columns.
std::string sp_solution_to_csv(const SPSolution& sol);

Json certificate_to_json(const LipschitzCertificate& cert, Eigen::Index n);
Json spacing_report_to_json(const SpacingReport& rep, Eigen::Index n);
Json orlicz_to_json(const OrliczResult& r);
Json slack_report_to_json(const SlackReport& r);
Json coupling_plan_to_json(const CouplingPlan& plan);
Json tail_report_to_json(const TailReport& rep);

/// Two curves per radius for plotting: "r,tail,bound".
std::string tail_report_to_csv(const TailReport& rep);

/// Cost matrix audit dump.
std::string matrix_to_csv(const Eigen::MatrixXd& m);

// --- manifests -------------------------------------------------------------

/// FNV-1a 64-bit over the canonical JSON dump.
std::string config_hash(const Json& config);

/// Reproduction manifest: command, resolved config, hash, seed, version,
/// output filenames. Deliberately excludes anything run-dependent.
Json make_manifest(const std::string& command, const Json& resolved_config,
                   std::uint64_t master_seed, const std::vector<std::string>& outputs);

void write_text(const std::filesystem::path& file, const std::string& text);
void write_json(const std::filesystem::path& file, const Json& j);

}  // namespace conclab
