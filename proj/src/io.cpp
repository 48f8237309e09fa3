#include "crossdiff/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace crossdiff {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, int line) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  while (end && (*end == ' ' || *end == '\r')) ++end;
  if (end == begin || (end && *end != '\0') || errno == ERANGE) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": '" + text + "' is not a number");
  }
  return v;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

std::string snapshot_csv(const Field& field, const Grid1D& grid) {
  require_same_grid(field, grid);
  std::string out = "x";
  for (int i = 0; i < field.species(); ++i) out += ",u_" + std::to_string(i);
  out += '\n';
  for (int c = 0; c < field.cells(); ++c) {
    out += format_double(grid.center(c));
    for (int i = 0; i < field.species(); ++i) out += ',' + format_double(field(c, i));
    out += '\n';
  }
  return out;
}

void write_snapshot_csv(const std::filesystem::path& path, const Field& field, const Grid1D& grid) {
  write_text_file(path, snapshot_csv(field, grid));
}

Snapshot parse_snapshot_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorCode::ParseError, "empty snapshot");
  const auto header = split_line(lines.front());
  if (header.size() < 3 || header.front() != "x") throw Error(ErrorCode::ParseError, "line 1: expected header x,u_0,...");
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i] != "u_" + std::to_string(i - 1)) {
      throw Error(ErrorCode::ParseError, "line 1: unexpected column '" + header[i] + "'");
    }
  }
  const int species = static_cast<int>(header.size()) - 1;
  std::vector<double> x;
  RowMatrix values(static_cast<Eigen::Index>(lines.size() - 1), species);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = split_line(lines[l]);
    const int line_no = static_cast<int>(l) + 1;
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(header.size()) + " columns");
    }
    x.push_back(parse_number(cells[0], line_no));
    for (int i = 0; i < species; ++i) {
      values(static_cast<Eigen::Index>(l - 1), i) = parse_number(cells[static_cast<std::size_t>(i + 1)], line_no);
    }
  }
  return Snapshot{std::move(x), Field::from(values)};
}

Snapshot read_snapshot_csv(const std::filesystem::path& path) { return parse_snapshot_csv(read_text_file(path)); }

std::string report_csv(const EntropyReport& report) {
  std::string out = "t";
  for (int i = 0; i < report.species; ++i) out += ",m_" + std::to_string(i);
  out += ",H,H_rel,dissipation,degenerate_fraction,newton_iters\n";
  for (const auto& row : report.rows) {
    out += format_double(row.t);
    for (int i = 0; i < report.species; ++i) out += ',' + format_double(row.mass(i));
    out += ',' + format_double(row.entropy) + ',' + format_double(row.relative_entropy) + ',' +
           format_double(row.dissipation) + ',' + format_double(row.degenerate_fraction) + ',' +
           std::to_string(row.newton_iterations) + '\n';
  }
  return out;
}

void write_report_csv(const std::filesystem::path& path, const EntropyReport& report) {
  write_text_file(path, report_csv(report));
}

EntropyReport parse_report_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorCode::ParseError, "empty report");
  const auto header = split_line(lines.front());
  if (header.size() < 8 || header.front() != "t") throw Error(ErrorCode::ParseError, "line 1: bad report header");
  EntropyReport report;
  report.species = static_cast<int>(header.size()) - 6;
  for (int i = 0; i < report.species; ++i) {
    if (header[static_cast<std::size_t>(i + 1)] != "m_" + std::to_string(i)) {
      throw Error(ErrorCode::ParseError, "line 1: unexpected column '" + header[static_cast<std::size_t>(i + 1)] + "'");
    }
  }
  const std::vector<std::string> tail{"H", "H_rel", "dissipation", "degenerate_fraction", "newton_iters"};
  for (std::size_t i = 0; i < tail.size(); ++i) {
    if (header[static_cast<std::size_t>(report.species) + 1 + i] != tail[i]) {
      throw Error(ErrorCode::ParseError, "line 1: expected column '" + tail[i] + "'");
    }
  }
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = split_line(lines[l]);
    const int line_no = static_cast<int>(l) + 1;
    if (cells.size() != header.size()) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": wrong column count");
    EntropyRow row;
    std::size_t at = 0;
    row.t = parse_number(cells[at++], line_no);
    row.mass.resize(report.species);
    for (int i = 0; i < report.species; ++i) row.mass(i) = parse_number(cells[at++], line_no);
    row.entropy = parse_number(cells[at++], line_no);
    row.relative_entropy = parse_number(cells[at++], line_no);
    row.dissipation = parse_number(cells[at++], line_no);
    row.degenerate_fraction = parse_number(cells[at++], line_no);
    row.newton_iterations = static_cast<int>(parse_number(cells[at++], line_no));
    report.rows.push_back(std::move(row));
  }
  return report;
}

EntropyReport read_report_csv(const std::filesystem::path& path) { return parse_report_csv(read_text_file(path)); }

nlohmann::json report_json(const EntropyReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"t", row.t},
                    {"mass", std::vector<double>(row.mass.data(), row.mass.data() + row.mass.size())},
                    {"H", row.entropy},
                    {"H_rel", row.relative_entropy},
                    {"dissipation", row.dissipation},
                    {"degenerate_fraction", row.degenerate_fraction},
                    {"newton_iters", row.newton_iterations}});
  }
  return {{"species", report.species}, {"rows", rows}};
}

EntropyReport report_from_json(const nlohmann::json& j) {
  EntropyReport report;
  try {
    report.species = j.at("species").get<int>();
    for (const auto& r : j.at("rows")) {
      EntropyRow row;
      row.t = r.at("t").get<double>();
      const auto mass = r.at("mass").get<std::vector<double>>();
      row.mass = Eigen::Map<const Eigen::VectorXd>(mass.data(), static_cast<Eigen::Index>(mass.size()));
      row.entropy = r.at("H").get<double>();
      row.relative_entropy = r.at("H_rel").get<double>();
      row.dissipation = r.at("dissipation").get<double>();
      row.degenerate_fraction = r.at("degenerate_fraction").get<double>();
      row.newton_iterations = r.at("newton_iters").get<int>();
      report.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return report;
}

nlohmann::json hypothesis_json(const HypothesisReport& report) {
  nlohmann::json j = {{"H1", report.symmetric},
                      {"H2", report.nonnegative},
                      {"H2*", report.full_interaction},
                      {"H3", report.has_connected_species}};
  j["i0"] = report.witness ? nlohmann::json(*report.witness) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json model_summary_json(const InteractionMatrix& k) {
  nlohmann::json j;
  j["n"] = k.n();
  std::vector<double> flat;
  for (int i = 0; i < k.species(); ++i) {
    for (int l = 0; l < k.species(); ++l) flat.push_back(k(i, l));
  }
  j["K"] = flat;
  j["hypotheses"] = hypothesis_json(check_hypotheses(k));
  j["kappa"] = kappa(k);
  try {
    const auto cls = classify_species(k);
    j["classification"] = {{"A", cls.a}, {"B", cls.b}, {"C", cls.c}, {"i0", cls.witness}};
  } catch (const Error&) {
    j["classification"] = nullptr;
  }
  return j;
}

}  // namespace crossdiff
