#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "crossdiff/entropy.hpp"
#include "crossdiff/grid.hpp"
#include "crossdiff/model.hpp"

// CSV and JSON formats. All floats are written with 17 significant digits so
// that a write/read cycle is exact.

namespace crossdiff {

std::string format_double(double value);

/// Columns x,u_0,...,u_n.
void write_snapshot_csv(const std::filesystem::path& path, const Field& field, const Grid1D& grid);
std::string snapshot_csv(const Field& field, const Grid1D& grid);

struct Snapshot {
  std::vector<double> x;
  Field field;
};
Snapshot read_snapshot_csv(const std::filesystem::path& path);
Snapshot parse_snapshot_csv(const std::string& text);

/// Columns t,m_0..m_n,H,H_rel,dissipation,degenerate_fraction,newton_iters.
std::string report_csv(const EntropyReport& report);
void write_report_csv(const std::filesystem::path& path, const EntropyReport& report);
EntropyReport parse_report_csv(const std::string& text);
EntropyReport read_report_csv(const std::filesystem::path& path);

nlohmann::json report_json(const EntropyReport& report);
EntropyReport report_from_json(const nlohmann::json& j);

nlohmann::json hypothesis_json(const HypothesisReport& report);
/// Hypotheses plus the A/B/C partition (null when H3 fails).
nlohmann::json model_summary_json(const InteractionMatrix& k);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace crossdiff
