#pragma once

#include <span>
#include <string>
#include <vector>

namespace pinn {

/// One dependent variable on a tensor-product grid, multilinear interpolation
/// between nodes (clamped extrapolation at the edges).
struct ReferenceField {
  std::string dvar;
  std::vector<std::vector<double>> grids;  // per axis, ascending
  std::vector<double> values;              // row-major, last axis fastest

  double interpolate(std::span<const double> coords) const;
  size_t index(std::span<const size_t> idx) const;
};

struct ReferenceTable {
  std::string problem;
  int resolution = 0;
  std::string solver_version;
  std::vector<ReferenceField> fields;

  const ReferenceField* field(const std::string& dvar) const;
};

/// Independent finite-difference reference solutions: second-order central
/// differences in space, Crank-Nicolson time stepping.
///   diffusion1d  u(t,x)
///   spm          q(t), csn(t,rn), csp(t,rp)   (finite-volume radial scheme)
///   reduced_p2d  ce(t,x), phie(t,x)
ReferenceTable reference_solve(const std::string& id, int resolution);

void save_reference_csv(const ReferenceTable& table, const std::string& path);
ReferenceTable load_reference_csv(const std::string& path);

/// Reference trajectory of the Lorenz system from (1,0,0) with parameters
/// (sigma, rho, beta): classic RK4 at fine step dt_fine, sampled every
/// `stride` steps up to t_end.
struct LorenzTrajectory {
  std::vector<double> t, x, y, z;
};
LorenzTrajectory lorenz_reference(double sigma, double rho, double beta, double t_end,
                                  double dt_fine, int stride);

}  // namespace pinn
