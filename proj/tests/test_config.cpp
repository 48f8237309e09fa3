#include <doctest.h>

#include "crossdiff/config.hpp"

using namespace crossdiff;

namespace {

ErrorCode code_of(const std::string& text, std::string* message = nullptr) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

const char* kMinimal = R"({"schema": 1, "model": {"n": 1, "K": [0, 2, 2, 0]}})";

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("minimal config") {
    const auto c = parse_config(kMinimal);
    CHECK(c.model.k.n() == 1);
    CHECK(c.model.k(0, 1) == 2.0);
    CHECK_FALSE(c.initial);
    CHECK_FALSE(c.output);
    CHECK_FALSE(c.epsilon);
    CHECK(c.solver.over(SolverConfig{}).tau == SolverConfig{}.tau);
    CHECK(c.grid.over(Grid1D(3.0, 7)) == Grid1D(3.0, 7));
  }

  TEST_CASE("full config with comments and nested K") {
    const auto c = parse_config(R"({
      // comment
      "schema": 1,
      "model": {"n": 2, "K": [[0, 1, 1], [1, 0, 0], [1, 0, 0]], "epsilon": 0.05},
      "grid": {"L": 2.0, "m": 32},
      "solver": {"tau": 1e-3, "T": 0.5, "newton_tol": 1e-9, "newton_max": 20, "delta_stab": 0.0,
                 "theta": 1e-9, "output_every": 10, "jacobian": "fd"},
      "initial": {"profile": "gaussian", "base": [0.4, 0.3, 0.3], "amplitude": [0, 0.1, 0],
                  "center": 0.5, "width": 0.2, "remainder": 0},
      "output": "out/x",
      "study": {"deltas": [0.01, 0.001], "reference": "refined", "parallel": false}
    })");
    CHECK(c.model.k(1, 2) == 0.0);
    REQUIRE(c.epsilon);
    CHECK(*c.epsilon == 0.05);
    CHECK(c.grid.over(Grid1D(1.0, 2)) == Grid1D(2.0, 32));
    const auto s = c.solver.over(SolverConfig{});
    CHECK(s.final_time == 0.5);
    CHECK(s.newton_max == 20);
    CHECK(s.output_every == 10);
    CHECK(s.jacobian == JacobianKind::FiniteDifference);
    REQUIRE(c.initial);
    CHECK(c.initial->kind == ProfileSpec::Kind::Gaussian);
    CHECK(c.initial->remainder == 0);
    CHECK(c.output->string() == "out/x");
    CHECK(*c.study.reference == StabilityReference::Refined);
    CHECK(c.study.deltas->size() == 2);
    CHECK(*c.study.parallel == false);
  }

  TEST_CASE("model errors are validation errors") {
    std::string message;
    CHECK(code_of(R"({"schema": 1, "model": {"n": 1, "K": [0, 1, 2, 0]}})", &message) == ErrorCode::ValidationError);
    CHECK(message.find("K(0,1)") != std::string::npos);
    CHECK(code_of(R"({"schema": 1, "model": {"n": 1, "K": [0, -1, -1, 0]}})") == ErrorCode::ValidationError);
    CHECK(code_of(R"({"schema": 1, "model": {"n": 2, "K": [0, 1, 1, 0]}})") == ErrorCode::ValidationError);
  }

  TEST_CASE("unknown keys name their path") {
    std::string message;
    CHECK(code_of(R"({"schema": 1, "model": {"n": 1, "K": [0, 1, 1, 0]}, "solver": {"tua": 1}})", &message) ==
          ErrorCode::ParseError);
    CHECK(message.find("solver.tua") != std::string::npos);
    CHECK(code_of(R"({"schema": 1, "model": {"n": 1, "K": [0, 1, 1, 0]}, "extra": 1})", &message) ==
          ErrorCode::ParseError);
    CHECK(message.find("extra") != std::string::npos);
  }

  TEST_CASE("syntax errors carry line and column") {
    std::string message;
    CHECK(code_of("{\n  \"schema\": 1,\n  oops\n}", &message) == ErrorCode::ParseError);
    CHECK(message.find("line 3:") != std::string::npos);
  }

  TEST_CASE("types and ranges") {
    CHECK(code_of(R"({"schema": 1, "model": {"n": 1, "K": [0, 1, 1, 0]}, "grid": {"m": "ten"}})") ==
          ErrorCode::ParseError);
    CHECK(code_of(R"({"schema": 1, "model": {"n": 1, "K": [0, 1, 1, 0]}, "grid": {"m": 0}})") ==
          ErrorCode::ValidationError);
    CHECK(code_of(R"({"schema": 1, "model": {"n": 1, "K": [0, 1, 1, 0]}, "solver": {"tau": -1}})") ==
          ErrorCode::ValidationError);
    CHECK(code_of(R"({"schema": 2, "model": {"n": 1, "K": [0, 1, 1, 0]}})") == ErrorCode::ValidationError);
    CHECK(code_of(R"({"model": {"n": 1, "K": [0, 1, 1, 0]}})") == ErrorCode::ParseError);
    CHECK(code_of(R"({"schema": 1, "model": {"n": 1, "K": [0, 1, 1, 0]},
                      "initial": {"profile": "spiral"}})") == ErrorCode::ValidationError);
  }

  TEST_CASE("study names") {
    for (auto kind : {StudyKind::Heat, StudyKind::Decay, StudyKind::Stability, StudyKind::Epsilon,
                      StudyKind::Equilibration, StudyKind::Simulate}) {
      CHECK(study_kind_from_name(study_name(kind)) == kind);
    }
    CHECK_FALSE(study_kind_from_name("nope"));
  }

  TEST_CASE("studies needing initial data say so") {
    const auto c = parse_config(kMinimal);
    CHECK_THROWS_AS(run_configured(c, StudyKind::Stability), Error);
  }
}
