#include "crossdiff/profile.hpp"

#include <cmath>
#include <numbers>

#include "crossdiff/io.hpp"

namespace crossdiff {

namespace {

std::vector<double> sized(const std::vector<double>& v, int species, double fill, const char* name) {
  if (v.empty()) return std::vector<double>(static_cast<std::size_t>(species), fill);
  if (static_cast<int>(v.size()) != species) {
    throw Error(ErrorCode::InvalidConfig, std::string("profile field '") + name + "' needs " +
                                              std::to_string(species) + " entries");
  }
  return v;
}

Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Pointwise recipe for the analytic kinds.
Profile analytic_profile(const ProfileSpec& spec, double length, int species) {
  using Kind = ProfileSpec::Kind;
  switch (spec.kind) {
    case Kind::Constant: {
      const Eigen::VectorXd base = as_vector(sized(spec.base, species, 1.0, "base"));
      return [base](double) { return base; };
    }
    case Kind::Cosine: {
      const Eigen::VectorXd base = as_vector(sized(spec.base, species, 1.0, "base"));
      const Eigen::VectorXd amp = as_vector(sized(spec.amplitude, species, 0.0, "amplitude"));
      const Eigen::VectorXd mode = as_vector(sized(spec.mode, species, 1.0, "mode"));
      const Eigen::VectorXd phase = as_vector(sized(spec.phase, species, 0.0, "phase"));
      return [=](double x) {
        Eigen::VectorXd u(species);
        for (int i = 0; i < species; ++i) u(i) = base(i) + amp(i) * std::cos(mode(i) * std::numbers::pi * x / length + phase(i));
        return u;
      };
    }
    case Kind::Gaussian: {
      const Eigen::VectorXd base = as_vector(sized(spec.base, species, 1.0, "base"));
      const Eigen::VectorXd amp = as_vector(sized(spec.amplitude, species, 0.0, "amplitude"));
      if (!(spec.width > 0.0)) throw Error(ErrorCode::InvalidConfig, "gaussian width must be positive");
      const double center = spec.center, width = spec.width;
      return [=](double x) {
        const double z = (x - center) / width;
        return (base + amp * std::exp(-z * z)).eval();
      };
    }
    case Kind::Step: {
      const Eigen::VectorXd left = as_vector(sized(spec.left, species, 1.0, "left"));
      const Eigen::VectorXd right = as_vector(sized(spec.right, species, 1.0, "right"));
      const double split = spec.split;
      return [=](double x) { return x < split ? left : right; };
    }
    case Kind::Csv:
      break;
  }
  throw Error(ErrorCode::InvalidConfig, "profile kind has no pointwise form");
}

}  // namespace

Field make_initial(const ProfileSpec& spec, const Grid1D& grid, int species) {
  if (spec.remainder >= species) throw Error(ErrorCode::InvalidConfig, "remainder species out of range");
  if (spec.kind == ProfileSpec::Kind::Csv) {
    Snapshot snap = read_snapshot_csv(spec.path);
    if (snap.field.cells() != grid.cells() || snap.field.species() != species) {
      throw Error(ErrorCode::GridMismatch, "initial CSV '" + spec.path + "' has " +
                                               std::to_string(snap.field.cells()) + " cells and " +
                                               std::to_string(snap.field.species()) + " species");
    }
    return snap.field;
  }
  Profile profile = analytic_profile(spec, grid.length(), species);
  if (spec.remainder >= 0) {
    const int r = spec.remainder;
    profile = [inner = std::move(profile), r](double x) {
      Eigen::VectorXd u = inner(x);
      u(r) = 0.0;
      u(r) = 1.0 - u.sum();
      return u;
    };
  }
  return init_field(grid, species, profile);
}

}  // namespace crossdiff
