// Acceptance run: one PASS/FAIL line per criterion, exit 0 iff all pass.
// Usage: acceptance [config-dir]

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "crossdiff/algebra.hpp"
#include "crossdiff/config.hpp"
#include "crossdiff/entropy.hpp"
#include "support.hpp"

using namespace crossdiff;

namespace {

struct Line {
  bool passed = true;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Criterion-5 verdicts gathered from every study the acceptance run performs.
std::vector<Verdict> structure;

bool verdicts_pass(const StudyResult& r, int criterion, std::string& detail) {
  bool ok = true;
  for (const auto& v : r.verdicts) {
    if (v.criterion == 5) structure.push_back(v);
    if (v.criterion != criterion) continue;
    ok = ok && v.passed;
    if (!v.passed) detail += " [failed: " + v.check + " -- " + v.detail + "]";
  }
  return ok;
}

Line heat(const std::filesystem::path& dir) {
  const auto start = std::chrono::steady_clock::now();
  const auto r = run_configured(load_config(dir / "heat.json"), StudyKind::Heat);
  const double elapsed = seconds_since(start);
  Line line;
  line.detail = fmt("max error %.3e, refinement ratio %.3f, %.1f s", r.fitted.at("max_error"),
                    r.fitted.at("error_ratio"), elapsed);
  line.passed = verdicts_pass(r, 1, line.detail) && r.fitted.at("max_error") <= 1e-3 &&
                r.fitted.at("error_ratio") >= 3.0 && elapsed <= 10.0;
  return line;
}

Line decay(const std::filesystem::path& dir) {
  const auto start = std::chrono::steady_clock::now();
  const auto r = run_configured(load_config(dir / "decay.json"), StudyKind::Decay);
  const double elapsed = seconds_since(start);
  const double rate = r.fitted.at("rate");
  const double expected = 2.0 * M_PI * M_PI;
  Line line;
  line.detail = fmt("rate %.4f vs 2 pi^2 = %.4f, %.2f s", rate, expected, elapsed);
  line.passed = verdicts_pass(r, 2, line.detail) && std::abs(rate / expected - 1.0) <= 0.10 && elapsed <= 30.0;
  return line;
}

Line identities() {
  const auto start = std::chrono::steady_clock::now();
  gen::Rng rng(20240301);
  const int sizes[] = {1, 2, 3, 5};
  const double tol = 1e-12;
  int failures[5] = {0, 0, 0, 0, 0};
  for (int sample = 0; sample < 1000; ++sample) {
    const int n = sizes[sample % 4];
    const int s = n + 1;
    const auto k = gen::model(rng, s, sample % 4 == 3 ? 0.3 : 0.0);
    const auto u = gen::point(rng, s);
    const auto xi = TangentVector::from(gen::tangent(rng, s));
    const auto r = project(u);
    const Eigen::VectorXd zeta = xi.values().tail(n);

    const Eigen::MatrixXd p = dissipation_matrix(k, u);
    const Eigen::VectorXd ax = xi.values().cwiseAbs();
    const double scale = std::max(ax.dot(p.cwiseAbs() * ax), 1e-300);

    // (a) sum formula against the matrix product
    const double by_sum = dissipation_form_sum(k, u, xi);
    const double by_matrix = dissipation_form_matrix(k, u, xi);
    if (std::abs(by_sum - by_matrix) > tol * scale) ++failures[0];

    // (b) coercivity bounds, full and reduced
    const auto b = coercivity_bounds(k, u, xi);
    const auto rc = reduced_coercivity(k, r, zeta);
    if (b.lhs < b.bound_pd - tol * scale || b.lhs < b.bound_ff - tol * scale || rc.lhs < rc.bound - tol * scale)
      ++failures[1];

    // (c) reduced and full quadratic forms
    const double reduced = zeta.dot(reduced_dissipation_matrix(k, r) * zeta);
    if (std::abs(reduced - by_matrix) > tol * scale) ++failures[2];

    // (d) mobility annihilates constants
    const Eigen::MatrixXd m = mobility(k, u);
    if ((m * Eigen::VectorXd::Ones(s)).cwiseAbs().maxCoeff() > tol * std::max(1.0, m.cwiseAbs().maxCoeff()))
      ++failures[3];

    // (e) reduced diffusion factorizes
    const Eigen::MatrixXd m_hat = reduced_mobility(k, r);
    const Eigen::MatrixXd h_hat = reduced_hessian(r);
    const double fscale = std::max(1.0, (m_hat.cwiseAbs() * h_hat.cwiseAbs()).maxCoeff());
    if ((reduced_diffusion(k, r) - m_hat * h_hat).cwiseAbs().maxCoeff() > tol * fscale) ++failures[4];
  }
  const double elapsed = seconds_since(start);
  Line line;
  line.passed = elapsed <= 5.0;
  const char* names[] = {"a", "b", "c", "d", "e"};
  line.detail = "1000 samples, failures";
  for (int i = 0; i < 5; ++i) {
    line.passed = line.passed && failures[i] == 0;
    line.detail += std::string(" ") + names[i] + "=" + std::to_string(failures[i]);
  }
  line.detail += fmt(", %.2f s", elapsed);
  return line;
}

// One trial (u, xi) for the semidefiniteness search. Half the trials are
// generic; the rest put most of the mass on a chosen pair and keep xi_k/u_k
// moderate elsewhere, which is where a negative pair shows up.
struct Trial {
  SimplexPoint u;
  Eigen::VectorXd xi;
};

Trial draw_trial(gen::Rng& rng, int s, int a, int b) {
  if (gen::uniform(rng, 0, 1) < 0.5) {
    return {gen::point(rng, s, 0.0), gen::tangent(rng, s)};
  }
  const double rest = std::pow(10.0, gen::uniform(rng, -5, -1));
  Eigen::VectorXd u = gen::simplex(rng, s, 0.0) * rest;
  const double share = gen::uniform(rng, 0.1, 0.9);
  u(a) += (1.0 - rest) * share;
  u(b) += (1.0 - rest) * (1.0 - share);
  u /= u.sum();
  Eigen::VectorXd xi(s);
  for (int i = 0; i < s; ++i) xi(i) = u(i) * gen::normal(rng);
  xi(a) = gen::normal(rng);
  xi(b) = 0.0;
  xi(b) = -xi.sum();
  return {SimplexPoint::from(u), xi};
}

bool is_witness(const Eigen::MatrixXd& k, const Trial& t) {
  const Eigen::MatrixXd p = trial_dissipation_matrix(k, t.u);
  const double value = t.xi.dot(p * t.xi);
  const Eigen::VectorXd ax = t.xi.cwiseAbs();
  return value < -1e-9 * ax.dot(p.cwiseAbs() * ax);
}

Line semidefinite() {
  gen::Rng rng(77);
  constexpr int kSamples = 10000;
  int found = 0, false_alarms = 0;
  long used = 0;
  for (int model = 0; model < 100; ++model) {
    const int s = 2 + model % 5;
    Eigen::MatrixXd k = gen::symmetric_table(rng, s, 0.2);
    const int a = gen::integer(rng, 0, s - 1);
    int b = gen::integer(rng, 0, s - 2);
    if (b >= a) ++b;
    k(a, b) = k(b, a) = -gen::uniform(rng, 1e-2, 3.0);
    for (int trial = 0; trial < kSamples; ++trial) {
      if (is_witness(k, draw_trial(rng, s, a, b))) {
        ++found;
        used += trial + 1;
        break;
      }
    }
  }
  for (int model = 0; model < 100; ++model) {
    const int s = 2 + model % 5;
    const Eigen::MatrixXd k = gen::symmetric_table(rng, s, 0.2);
    for (int trial = 0; trial < kSamples; ++trial) {
      const int a = gen::integer(rng, 0, s - 1);
      int b = gen::integer(rng, 0, s - 2);
      if (b >= a) ++b;
      if (is_witness(k, draw_trial(rng, s, a, b))) {
        ++false_alarms;
        break;
      }
    }
  }
  Line line;
  line.passed = found == 100 && false_alarms == 0;
  line.detail = fmt("witness found for %.0f/100 indefinite K (mean %.1f samples); %.0f/100 nonnegative K with a witness",
                    found, found ? static_cast<double>(used) / found : 0.0, false_alarms);
  return line;
}

Line balance(const std::filesystem::path& dir) {
  const RunConfig bench = load_config(dir / "stability.json");
  BalanceStudyParams p;
  p.grid = bench.grid.over(p.grid);
  p.initial = *bench.initial;
  const auto r = dissipation_balance_study(bench.model.k, p);
  Line line;
  line.detail = fmt("defect factors %.3f, %.3f, %.3f", r.fitted.at("factor_1"), r.fitted.at("factor_2"),
                    r.fitted.at("factor_3"));
  line.passed = verdicts_pass(r, 6, line.detail);
  return line;
}

Line stability(const std::filesystem::path& dir) {
  const auto r = run_configured(load_config(dir / "stability.json"), StudyKind::Stability);
  Line line;
  line.detail = fmt("C_fit in [%.4f, %.4f], spread %.4f", r.fitted.at("C_fit_min"), r.fitted.at("C_fit_max"),
                    r.fitted.at("C_fit_spread"));
  line.passed = verdicts_pass(r, 7, line.detail);
  return line;
}

Line epsilon(const std::filesystem::path& dir) {
  const RunConfig partial = load_config(dir / "epsilon.json");
  const auto r = run_configured(partial, StudyKind::Epsilon);
  RunConfig full = partial;
  full.model = validate_hypotheses(load_config(dir / "stability.json").model.k.matrix());
  const auto f = run_configured(full, StudyKind::Epsilon);
  Line line;
  std::string d;
  for (const auto& row : r.tables.at("differences")) d += fmt(" %.3e", row.at("d").get<double>());
  line.detail = "partial d_k:" + d + "; full interaction";
  double worst = 0.0;
  for (const auto& row : f.tables.at("differences")) worst = std::max(worst, row.at("d").get<double>());
  line.detail += fmt(" max d_k %.1e", worst);
  line.passed = verdicts_pass(r, 8, line.detail) && verdicts_pass(f, 8, line.detail);
  return line;
}

Line equilibration(const std::filesystem::path& dir) {
  Line line;
  for (const char* name : {"equilibration_b", "equilibration_c"}) {
    const auto start = std::chrono::steady_clock::now();
    const auto r = run_configured(load_config(dir / (std::string(name) + ".json")), StudyKind::Equilibration);
    const double elapsed = seconds_since(start);
    if (!line.detail.empty()) line.detail += "; ";
    line.detail += std::string(name == std::string("equilibration_b") ? "B-type" : "C-type") +
                   fmt(" L1 %.2e, %.1f s", r.fitted.at("final_l1_distance"), elapsed);
    line.passed = verdicts_pass(r, 9, line.detail) && elapsed <= 120.0 && line.passed;
  }
  return line;
}

Line csiszar_kullback() {
  gen::Rng rng(4242);
  int failures = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int s = gen::integer(rng, 2, 6);
    const Grid1D grid(gen::uniform(rng, 0.5, 4.0), gen::integer(rng, 2, 64));
    const auto field = gen::field(rng, grid.cells(), s, trial % 2 ? 0.0 : 1e-3);
    const auto gap = csiszar_kullback_gap(field, grid_average(field, grid), grid);
    if (gap.rhs > 0) worst = std::max(worst, gap.lhs / gap.rhs);
    if (gap.lhs > gap.rhs) ++failures;
  }
  const auto hand = csiszar_kullback_gap(Field::constant(8, SimplexPoint::from(Eigen::Vector2d(0.25, 0.75))),
                                         SimplexPoint::from(Eigen::Vector2d(0.5, 0.5)), Grid1D(1.0, 8));
  const bool hand_ok = std::abs(hand.lhs - 0.25) <= 1e-12 && std::abs(hand.rhs - 0.5232481) <= 1e-7 && hand.lhs <= hand.rhs;
  Line line;
  line.passed = failures == 0 && hand_ok;
  line.detail = fmt("%.0f/100 random fields violate, worst lhs/rhs %.3f; hand case %.7f <= ", failures, worst, hand.lhs) +
                fmt("%.7f", hand.rhs);
  return line;
}

Line structure_line() {
  Line line;
  int failed = 0;
  for (const auto& v : structure) {
    if (!v.passed) {
      ++failed;
      line.detail += " [failed: " + v.check + " -- " + v.detail + "]";
    }
  }
  line.passed = failed == 0 && !structure.empty();
  line.detail = fmt("%.0f structure checks over all runs above, %.0f failed", static_cast<double>(structure.size()), failed) +
                line.detail;
  return line;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : CROSSDIFF_CONFIG_DIR;
  Line lines[11];
  auto guarded = [](const std::function<Line()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Line{false, std::string("error: ") + e.what()};
    }
  };
  lines[1] = guarded([&] { return heat(dir); });
  lines[2] = guarded([&] { return decay(dir); });
  lines[3] = guarded(identities);
  lines[4] = guarded(semidefinite);
  lines[6] = guarded([&] { return balance(dir); });
  lines[7] = guarded([&] { return stability(dir); });
  lines[8] = guarded([&] { return epsilon(dir); });
  lines[9] = guarded([&] { return equilibration(dir); });
  lines[10] = guarded(csiszar_kullback);
  lines[5] = structure_line();

  bool all = true;
  for (int c = 1; c <= 10; ++c) {
    std::printf("criterion %2d: %s -- %s\n", c, lines[c].passed ? "PASS" : "FAIL", lines[c].detail.c_str());
    all = all && lines[c].passed;
  }
  std::printf("acceptance: %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}
