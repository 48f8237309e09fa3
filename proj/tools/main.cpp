#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crossdiff/crossdiff.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

// Statuses that point at the input rather than the computation.
bool is_input_error(cd_status s) {
  switch (s) {
    case CD_ERR_NEWTON_DIVERGED:
    case CD_ERR_NON_FINITE_RESIDUAL:
    case CD_ERR_INTERNAL:
      return false;
    default:
      return s != CD_OK;
  }
}

int report_error(cd_status s) {
  std::cerr << "error: " << cd_last_error() << "\n";
  return is_input_error(s) ? kExitUsage : kExitFailed;
}

template <class Fill>
std::string fetch_text(Fill&& fill) {
  size_t needed = 0;
  fill(nullptr, 0, &needed);
  std::string text(needed, '\0');
  if (fill(text.data(), text.size(), &needed) != CD_OK) return {};
  text.resize(needed - 1);
  return text;
}

std::vector<double> parse_matrix(const std::string& spec, int& species) {
  std::vector<double> values;
  species = 0;
  std::stringstream rows(spec);
  std::string row;
  while (std::getline(rows, row, ';')) {
    std::stringstream cells(row);
    std::string cell;
    int count = 0;
    while (std::getline(cells, cell, ',')) {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      ++count;
    }
    if (species == 0) species = count;
    if (count != species) throw std::invalid_argument("rows differ in length");
  }
  if (static_cast<int>(values.size()) != species * species) throw std::invalid_argument("matrix is not square");
  return values;
}

void print_summary(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  const auto& h = j.at("hypotheses");
  std::cout << "species: " << j.at("n").get<int>() + 1 << " (n = " << j.at("n") << ")\n";
  std::cout << "H1 symmetric:          " << (h.at("H1").get<bool>() ? "yes" : "no") << "\n";
  std::cout << "H2 nonnegative:        " << (h.at("H2").get<bool>() ? "yes" : "no") << "\n";
  std::cout << "H2* full interaction:  " << (h.at("H2*").get<bool>() ? "yes" : "no") << "\n";
  std::cout << "H3 connected species:  " << (h.at("H3").get<bool>() ? "yes" : "no");
  if (!h.at("i0").is_null()) std::cout << " (i0 = " << h.at("i0") << ")";
  std::cout << "\nkappa: " << j.at("kappa").get<double>() << "\n";
  const auto& cls = j.at("classification");
  if (cls.is_null()) {
    std::cout << "classification: unavailable (H3 fails)\n";
  } else {
    std::cout << "classification: A=" << cls.at("A").dump() << " B=" << cls.at("B").dump() << " C=" << cls.at("C").dump()
              << "\n";
  }
  std::cout << j.dump(2) << "\n";
}

int run_validate(const std::string& config_path, const std::string& matrix, bool quiet) {
  cd_model* model = nullptr;
  cd_status s = CD_OK;
  if (!matrix.empty()) {
    int species = 0;
    std::vector<double> values;
    try {
      values = parse_matrix(matrix, species);
    } catch (const std::exception&) {
      std::cerr << "error: --matrix expects rows separated by ';' and entries by ',', e.g. \"0,2;2,0\"\n";
      return kExitUsage;
    }
    s = cd_model_create(values.data(), species, &model);
  } else {
    cd_config* config = nullptr;
    s = cd_config_load(config_path.c_str(), &config);
    if (s == CD_OK) s = cd_config_model(config, &model);
    cd_config_destroy(config);
  }
  if (s != CD_OK) return report_error(s);
  const std::string summary = fetch_text([&](char* b, size_t c, size_t* n) { return cd_model_summary_json(model, b, c, n); });
  cd_model_destroy(model);
  if (!quiet) print_summary(summary);
  return kExitOk;
}

int run_study(const std::string& name, const std::string& config_path, const std::string& out, bool quiet) {
  cd_study_kind kind;
  if (cd_study_kind_from_name(name.c_str(), &kind) != CD_OK) {
    std::cerr << "error: " << cd_last_error() << "\n";
    return kExitUsage;
  }
  cd_config* config = nullptr;
  cd_status s = cd_config_load(config_path.c_str(), &config);
  if (s != CD_OK) return report_error(s);
  if (!out.empty()) cd_config_set_output(config, out.c_str());
  cd_study* study = nullptr;
  s = cd_run_study(config, kind, &study);
  cd_config_destroy(config);
  if (s != CD_OK) return report_error(s);

  const bool passed = cd_study_passed(study) != 0;
  if (!quiet) {
    if (kind == CD_STUDY_HEAT) {
      std::printf("max error: %.6e\n", cd_study_fitted(study, "max_error"));
      const double ratio = cd_study_fitted(study, "error_ratio");
      if (!std::isnan(ratio)) std::printf("refinement ratio: %.4f\n", ratio);
    }
    const size_t count = cd_study_verdict_count(study);
    for (size_t i = 0; i < count; ++i) {
      int criterion = 0, ok = 0;
      const char* check = nullptr;
      const char* detail = nullptr;
      cd_study_verdict(study, i, &criterion, &ok, &check, &detail);
      std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion, check, *detail ? " -- " : "", detail);
    }
    if (!out.empty()) std::printf("output: %s\n", out.c_str());
    std::printf("%s: %s\n", name.c_str(), passed ? "PASS" : "FAIL");
  }
  cd_study_destroy(study);
  return passed ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Size-exclusion cross-diffusion solver and numerical studies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cd_version()));

  std::string config_path, out, matrix;
  bool quiet = false;

  auto* validate = app.add_subcommand("validate", "check the interaction matrix hypotheses and classify species");
  auto* vconfig = validate->add_option("--config", config_path, "config file")->check(CLI::ExistingFile);
  auto* vmatrix = validate->add_option("--matrix", matrix, "inline matrix, rows separated by ';', e.g. \"0,2;2,0\"");
  vconfig->excludes(vmatrix);
  validate->add_flag("--quiet", quiet, "print nothing on success");

  const std::vector<std::pair<const char*, const char*>> studies{
      {"simulate", "run the solver and write snapshots and the entropy report"},
      {"heat-check", "n = 1 heat-equation comparison"},
      {"decay-study", "exponential decay of the relative entropy"},
      {"stability-study", "relative-entropy growth between perturbed trajectories"},
      {"epsilon-study", "vanishing-interaction limit K^eps = max(K, eps)"},
      {"equilibration-study", "long-time convergence for partial interactions"}};
  std::vector<CLI::App*> commands;
  for (const auto& [name, help] : studies) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_flag("--quiet", quiet, "print nothing; use the exit code");
    commands.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (validate->parsed()) {
    if (config_path.empty() && matrix.empty()) {
      std::cerr << "error: validate needs --config or --matrix\n";
      return kExitUsage;
    }
    return run_validate(config_path, matrix, quiet);
  }
  for (auto* sub : commands) {
    if (sub->parsed()) return run_study(sub->get_name(), config_path, out, quiet);
  }
  return kExitUsage;
}
