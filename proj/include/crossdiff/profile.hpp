#pragma once

#include <string>
#include <vector>

#include "crossdiff/grid.hpp"

namespace crossdiff {

/// Named initial-data recipe. Every profile is sampled at cell centres and
/// renormalized per cell by init_field.
struct ProfileSpec {
  enum class Kind { Constant, Cosine, Gaussian, Step, Csv };
  Kind kind = Kind::Constant;

  std::vector<double> base;       // constant, cosine, gaussian
  std::vector<double> amplitude;  // cosine, gaussian
  std::vector<double> mode;       // cosine: u_i = base_i + amp_i cos(mode_i pi x / L + phase_i)
  std::vector<double> phase;
  double center = 0.5;            // gaussian: amp_i exp(-((x - center)/width)^2)
  double width = 0.1;
  std::vector<double> left;       // step
  std::vector<double> right;
  double split = 0.5;
  std::string path;               // csv snapshot (cell count must match the grid)
  int remainder = -1;             // if >= 0, this species is set to 1 - sum of the others
};

Field make_initial(const ProfileSpec& spec, const Grid1D& grid, int species);

}  // namespace crossdiff
