#include "conclab/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "conclab/version.hpp"

namespace conclab {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end)
    throw std::invalid_argument("CSV: cannot parse number '" + s + "'");
  return v;
}

}  // namespace

std::string path_to_csv(const MultiPath& p) {
  std::string out = "time";
  for (Eigen::Index i = 0; i < p.dim(); ++i) out += ",x" + std::to_string(i + 1);
  out += '\n';
  for (Eigen::Index k = 0; k < p.grid.size(); ++k) {
    out += format_double(p.grid.points[k]);
    for (Eigen::Index i = 0; i < p.dim(); ++i) out += ',' + format_double(p.values(k, i));
    out += '\n';
  }
  return out;
}

MultiPath path_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("CSV: empty input");
  const auto header = split(line, ',');
  if (header.size() < 2 || header[0] != "time")
    throw std::invalid_argument("CSV: expected header time,x1,...");
  const auto dim = static_cast<Eigen::Index>(header.size() - 1);

  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (static_cast<Eigen::Index>(cells.size()) != dim + 1)
      throw std::invalid_argument("CSV: ragged row");
    times.push_back(parse_double(cells[0]));
    for (Eigen::Index i = 0; i < dim; ++i)
      values.push_back(parse_double(cells[static_cast<std::size_t>(i) + 1]));
  }
  if (times.size() < 2) throw std::invalid_argument("CSV: need at least two rows");

  MultiPath p;
  p.grid.points = Eigen::Map<Eigen::VectorXd>(times.data(), static_cast<Eigen::Index>(times.size()));
  p.grid.horizon = times.back();
  p.grid.step = times.size() > 1 ? times[1] - times[0] : times.back();
  p.values.resize(static_cast<Eigen::Index>(times.size()), dim);
  for (Eigen::Index k = 0; k < p.grid.size(); ++k)
    for (Eigen::Index i = 0; i < dim; ++i)
      p.values(k, i) = values[static_cast<std::size_t>(k * dim + i)];
  return p;
}

Json path_to_json(const MultiPath& p) {
  Json rows = Json::array();
  for (Eigen::Index k = 0; k < p.grid.size(); ++k) {
    Json row = Json::array();
    for (Eigen::Index i = 0; i < p.dim(); ++i) row.push_back(p.values(k, i));
    rows.push_back(std::move(row));
  }
  return Json{{"grid", Json{{"T", p.grid.horizon}, {"dt", p.grid.step}}}, {"values", rows}};
}

MultiPath path_from_json(const Json& j) {
  const TimeGrid grid = make_grid(j.at("grid").at("T").get<double>(),
                                  j.at("grid").at("dt").get<double>());
  const auto& rows = j.at("values");
  if (static_cast<Eigen::Index>(rows.size()) != grid.size())
    throw std::invalid_argument("path_from_json: row count does not match grid");
  const auto dim = static_cast<Eigen::Index>(rows.front().size());
  MultiPath p{grid, Eigen::MatrixXd(grid.size(), dim)};
  for (Eigen::Index k = 0; k < grid.size(); ++k)
    for (Eigen::Index i = 0; i < dim; ++i)
      p.values(k, i) = rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)].get<double>();
  return p;
}

std::string ensemble_to_wide_csv(const Ensemble& e) {
  std::string out = "time";
  for (Eigen::Index m = 0; m < e.size(); ++m)
    for (Eigen::Index i = 0; i < e.dim(); ++i)
      out += ",m" + std::to_string(m) + "_x" + std::to_string(i + 1);
  out += '\n';
  for (Eigen::Index k = 0; k < e.grid.size(); ++k) {
    out += format_double(e.grid.points[k]);
    for (Eigen::Index m = 0; m < e.size(); ++m)
      for (Eigen::Index i = 0; i < e.dim(); ++i)
        out += ',' + format_double(e.members[static_cast<std::size_t>(m)](k, i));
    out += '\n';
  }
  return out;
}

std::vector<std::string> ensemble_to_member_csvs(const Ensemble& e,
                                                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> names;
  char buf[32];
  for (Eigen::Index m = 0; m < e.size(); ++m) {
    std::snprintf(buf, sizeof(buf), "member_%05lld.csv", static_cast<long long>(m));
    names.emplace_back(buf);
    write_text(dir / names.back(), path_to_csv(e.member(m)));
  }
  return names;
}

Json seed_lineage_to_json(const SeedLineage& s) {
  return Json{{"master_seed", s.master_seed},
              {"scheme", "philox4x32-10"},
              {"member_streams", s.member_streams}};
}

std::string sp_solution_to_csv(const SPSolution& sol) {
  const Eigen::Index n = sol.phi.dim();
  const auto faces = static_cast<Eigen::Index>(sol.face_local_times.size());
  std::string out = "time";
  for (Eigen::Index i = 0; i < n; ++i) out += ",phi" + std::to_string(i + 1);
  for (Eigen::Index i = 0; i < n; ++i) out += ",eta" + std::to_string(i + 1);
  out += ",tv";
  for (Eigen::Index i = 0; i < faces; ++i) out += ",ell" + std::to_string(i + 1);
  out += '\n';
  for (Eigen::Index k = 0; k < sol.phi.grid.size(); ++k) {
    out += format_double(sol.phi.grid.points[k]);
    for (Eigen::Index i = 0; i < n; ++i) out += ',' + format_double(sol.phi.values(k, i));
    for (Eigen::Index i = 0; i < n; ++i) out += ',' + format_double(sol.eta.values(k, i));
    out += ',' + format_double(sol.tv.values[k]);
    for (Eigen::Index i = 0; i < faces; ++i)
      out += ',' + format_double(sol.face_local_times[static_cast<std::size_t>(i)].values[k]);
    out += '\n';
  }
  return out;
}

Json certificate_to_json(const LipschitzCertificate& cert, Eigen::Index n) {
  return Json{{"n", n},
              {"delta", cert.delta},
              {"diam_B", cert.diam_B},
              {"K", cert.K},
              {"spectral_radius", cert.spectral_radius},
              {"diam_exact", cert.diam_exact},
              {"u", std::vector<double>(cert.u.data(), cert.u.data() + cert.u.size())}};
}

Json spacing_report_to_json(const SpacingReport& rep, Eigen::Index n) {
  return Json{{"n", n},
              {"equal_entries_bound", rep.equal_entries_bound},
              {"min_singular_sq", rep.min_singular_sq},
              {"closed_form_1_minus_cos", rep.closed_form},
              {"disagreement", rep.disagreement}};
}

Json orlicz_to_json(const OrliczResult& r) {
  return Json{{"norm_phi", r.norm_phi}, {"norm_1", r.norm_1}, {"residual", r.residual}};
}

Json slack_report_to_json(const SlackReport& r) {
  return Json{{"wasserstein", r.wasserstein}, {"bound", r.bound},   {"slack", r.slack},
              {"allowance", r.allowance},     {"holds", r.holds},   {"p", r.p},
              {"C", r.C},                     {"H", r.H}};
}

Json coupling_plan_to_json(const CouplingPlan& plan) {
  return Json{{"assignment", plan.assignment}, {"cost", plan.cost}};
}

namespace {
std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}
}  // namespace

Json tail_report_to_json(const TailReport& rep) {
  Json j{{"statistic", rep.statistic_name},
         {"median", rep.median},
         {"n_samples", rep.n_samples},
         {"scale", rep.scale},
         {"r_valid", rep.r_valid},
         {"fitted_C", rep.fitted_C},
         {"r", to_vec(rep.r_grid)},
         {"tail", to_vec(rep.empirical_tail)},
         {"bound", to_vec(rep.bound)}};
  if (rep.diag_r.size()) {
    j["diagnostic"] = Json{{"r", to_vec(rep.diag_r)},
                           {"tail", to_vec(rep.diag_tail)},
                           {"log_tail_vs_r2_slope", rep.diag_fit.slope},
                           {"r2", rep.diag_fit.r2},
                           {"points", rep.diag_fit.points}};
  }
  return j;
}

std::string tail_report_to_csv(const TailReport& rep) {
  std::string out = "r,tail,bound\n";
  for (Eigen::Index i = 0; i < rep.r_grid.size(); ++i) {
    out += format_double(rep.r_grid[i]);
    out += ',' + format_double(rep.empirical_tail[i]);
    out += ',' + format_double(rep.bound.size() ? rep.bound[i] : 0.0);
    out += '\n';
  }
  return out;
}

std::string matrix_to_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string config_hash(const Json& config) {
  const std::string dump = config.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : dump) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json make_manifest(const std::string& command, const Json& resolved_config,
                   std::uint64_t master_seed, const std::vector<std::string>& outputs) {
  return Json{{"command", command},
              {"schema_version", kSchemaVersion},
              {"version", std::string(kToolName) + " " + kVersion},
              {"config", resolved_config},
              {"config_hash", config_hash(resolved_config)},
              {"master_seed", master_seed},
              {"outputs", outputs}};
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + file.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

void write_json(const std::filesystem::path& file, const Json& j) {
  write_text(file, j.dump(2) + "\n");
}

}  // namespace conclab
