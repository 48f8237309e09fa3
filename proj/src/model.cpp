#include "crossdiff/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace crossdiff {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonSquareInput: return "NonSquareInput";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NonzeroDiagonal: return "NonzeroDiagonal";
    case ErrorCode::AsymmetricCoefficients: return "AsymmetricCoefficients";
    case ErrorCode::NegativeCoefficient: return "NegativeCoefficient";
    case ErrorCode::HypothesisH3Violated: return "HypothesisH3Violated";
    case ErrorCode::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorCode::NotOnSimplex: return "NotOnSimplex";
    case ErrorCode::SingularAtBoundary: return "SingularAtBoundary";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ReferenceNotPositive: return "ReferenceNotPositive";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::NegativeProfile: return "NegativeProfile";
    case ErrorCode::DegenerateProfile: return "DegenerateProfile";
    case ErrorCode::NonFiniteResidual: return "NonFiniteResidual";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::DegenerateBaseline: return "DegenerateBaseline";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ValidatedModel validate_hypotheses(const Eigen::MatrixXd& raw) {
  if (raw.rows() != raw.cols() || raw.rows() < 2) {
    std::ostringstream msg;
    msg << "expected a square table with at least 2 species, got " << raw.rows() << "x" << raw.cols();
    throw Error(ErrorCode::NonSquareInput, msg.str());
  }
  const int s = static_cast<int>(raw.rows());
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      if (!std::isfinite(raw(i, j))) {
        std::ostringstream msg;
        msg << "entry (" << i << "," << j << ") is not finite";
        throw Error(ErrorCode::NonFiniteInput, msg.str());
      }
    }
  }
  for (int i = 0; i < s; ++i) {
    if (raw(i, i) != 0.0) {
      std::ostringstream msg;
      msg << "diagonal entry (" << i << "," << i << ") = " << raw(i, i) << " must be zero";
      throw Error(ErrorCode::NonzeroDiagonal, msg.str());
    }
  }
  for (int i = 0; i < s; ++i) {
    for (int j = i + 1; j < s; ++j) {
      if (raw(i, j) != raw(j, i)) {
        std::ostringstream msg;
        msg << "K(" << i << "," << j << ") = " << raw(i, j) << " but K(" << j << "," << i
            << ") = " << raw(j, i);
        throw Error(ErrorCode::AsymmetricCoefficients, msg.str());
      }
    }
  }
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      if (raw(i, j) < 0.0) {
        std::ostringstream msg;
        msg << "K(" << i << "," << j << ") = " << raw(i, j) << " is negative";
        throw Error(ErrorCode::NegativeCoefficient, msg.str());
      }
    }
  }
  InteractionMatrix k(raw);
  return ValidatedModel{k, check_hypotheses(k)};
}

ValidatedModel validate_hypotheses(const std::vector<double>& row_major) {
  const auto s = static_cast<long>(std::llround(std::sqrt(static_cast<double>(row_major.size()))));
  if (s * s != static_cast<long>(row_major.size())) {
    throw Error(ErrorCode::NonSquareInput,
                std::to_string(row_major.size()) + " values do not form a square table");
  }
  Eigen::MatrixXd raw(s, s);
  for (long i = 0; i < s; ++i) {
    for (long j = 0; j < s; ++j) raw(i, j) = row_major[static_cast<std::size_t>(i * s + j)];
  }
  return validate_hypotheses(raw);
}

HypothesisReport check_hypotheses(const InteractionMatrix& k) {
  HypothesisReport r;
  r.symmetric = true;
  r.nonnegative = true;
  r.full_interaction = true;
  const int s = k.species();
  for (int i = 0; i < s; ++i) {
    bool row_positive = true;
    for (int j = 0; j < s; ++j) {
      if (i == j) continue;
      if (k(i, j) != k(j, i)) r.symmetric = false;
      if (k(i, j) < 0.0) r.nonnegative = false;
      if (!(k(i, j) > 0.0)) {
        r.full_interaction = false;
        row_positive = false;
      }
    }
    if (row_positive && !r.witness) r.witness = i;
  }
  r.has_connected_species = r.witness.has_value();
  return r;
}

bool SpeciesClassification::in_a(int i) const {
  return std::find(a.begin(), a.end(), i) != a.end();
}

SpeciesClassification classify_species(const InteractionMatrix& k) {
  const int s = k.species();
  std::vector<bool> is_a(static_cast<std::size_t>(s), true);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      if (i != j && !(k(i, j) > 0.0)) is_a[static_cast<std::size_t>(i)] = false;
    }
  }
  SpeciesClassification out;
  for (int i = 0; i < s; ++i) {
    if (is_a[static_cast<std::size_t>(i)]) out.a.push_back(i);
  }
  if (out.a.empty()) {
    throw Error(ErrorCode::HypothesisH3Violated, "no species interacts with all others");
  }
  out.witness = out.a.front();
  for (int i = 0; i < s; ++i) {
    if (is_a[static_cast<std::size_t>(i)]) continue;
    bool type_b = true;
    for (int l = 0; l < s; ++l) {
      if (l != i && !is_a[static_cast<std::size_t>(l)] && k(i, l) != 0.0) type_b = false;
    }
    (type_b ? out.b : out.c).push_back(i);
  }
  return out;
}

InteractionMatrix regularize(const InteractionMatrix& k, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw Error(ErrorCode::EpsilonTooLarge, "epsilon must be a positive finite number");
  }
  double min_positive = std::numeric_limits<double>::infinity();
  const int s = k.species();
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      if (i != j && k(i, j) > 0.0) min_positive = std::min(min_positive, k(i, j));
    }
  }
  if (eps > min_positive) {
    std::ostringstream msg;
    msg << "epsilon " << eps << " exceeds smallest positive coefficient " << min_positive;
    throw Error(ErrorCode::EpsilonTooLarge, msg.str());
  }
  Eigen::MatrixXd out = k.matrix();
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      if (i != j) out(i, j) = std::max(out(i, j), eps);
    }
  }
  return InteractionMatrix(out);
}

InteractionMatrix InteractionMatrix::permuted(const std::vector<int>& perm) const {
  const int s = species();
  Eigen::MatrixXd out(s, s);
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) out(a, b) = k_(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
  }
  return InteractionMatrix(out);
}

InteractionMatrix InteractionMatrix::scaled(double factor) const {
  if (!(factor >= 0.0)) throw Error(ErrorCode::NegativeCoefficient, "scale factor must be >= 0");
  return InteractionMatrix(k_ * factor);
}

double kappa(const InteractionMatrix& k) {
  double m = std::numeric_limits<double>::infinity();
  const int s = k.species();
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      if (i != j) m = std::min(m, k(i, j));
    }
  }
  return m;
}

double kappa_alpha(const InteractionMatrix& k, int alpha) {
  if (alpha < 0 || alpha >= k.species()) throw Error(ErrorCode::OutOfRange, "species index");
  double m = std::numeric_limits<double>::infinity();
  for (int l = 0; l < k.species(); ++l) {
    if (l != alpha) m = std::min(m, k(alpha, l));
  }
  return 0.5 * m;
}

SimplexPoint SimplexPoint::from(const Eigen::VectorXd& u) {
  if (u.size() < 2) throw Error(ErrorCode::NotOnSimplex, "need at least two species");
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u(i)) || u(i) < 0.0) {
      throw Error(ErrorCode::NotOnSimplex, "density " + std::to_string(i) + " is negative or not finite");
    }
  }
  const double sum = u.sum();
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "densities sum to " << sum;
    throw Error(ErrorCode::NotOnSimplex, msg.str());
  }
  return SimplexPoint(u / sum);
}

ReducedPoint ReducedPoint::from(const Eigen::VectorXd& reduced) {
  if (reduced.size() < 1) throw Error(ErrorCode::NotOnSimplex, "need at least one reduced density");
  for (Eigen::Index i = 0; i < reduced.size(); ++i) {
    if (!std::isfinite(reduced(i)) || reduced(i) < 0.0) {
      throw Error(ErrorCode::NotOnSimplex, "reduced density " + std::to_string(i) + " is negative or not finite");
    }
  }
  const double v = 1.0 - reduced.sum();
  if (v < -kSimplexTolerance) throw Error(ErrorCode::NotOnSimplex, "reduced densities exceed total volume");
  return ReducedPoint(reduced, std::max(v, 0.0));
}

ReducedPoint ReducedPoint::with_vacancy(Eigen::VectorXd reduced, double vacancy) {
  if (!(vacancy >= 0.0) || (reduced.array() < 0.0).any()) {
    throw Error(ErrorCode::NotOnSimplex, "negative component");
  }
  return ReducedPoint(std::move(reduced), vacancy);
}

}  // namespace crossdiff
