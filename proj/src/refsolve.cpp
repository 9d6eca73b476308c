#include "pinn/refsolve.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <set>
#include <stdexcept>

namespace pinn {

namespace {

constexpr const char* kSolverVersion = "fd-1";

// Thomas algorithm; diagonals are overwritten.
void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                       std::vector<double>& upper, std::vector<double>& rhs) {
  size_t n = diag.size();
  for (size_t i = 1; i < n; ++i) {
    double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

ReferenceTable solve_diffusion1d(int n) {
  // u_t = u_xx + (e^-t - pi^2) sin(pi x), u(0,x)=sin(pi x), u(t,+-1)=0
  double dx = 2.0 / n;
  int nt = n;
  double dt = 1.0 / nt;
  std::vector<double> xs(static_cast<size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) xs[static_cast<size_t>(j)] = -1.0 + j * dx;
  std::vector<double> ts(static_cast<size_t>(nt) + 1);
  for (int k = 0; k <= nt; ++k) ts[static_cast<size_t>(k)] = k * dt;

  std::vector<double> u(xs.size());
  for (size_t j = 0; j < xs.size(); ++j) u[j] = std::sin(M_PI * xs[j]);
  u.front() = 0.0;
  u.back() = 0.0;

  ReferenceField field;
  field.dvar = "u";
  field.grids = {ts, xs};
  field.values.reserve(ts.size() * xs.size());
  field.values.insert(field.values.end(), u.begin(), u.end());

  size_t m = xs.size() - 2;  // interior unknowns
  double r = dt / (2.0 * dx * dx);
  std::vector<double> lower(m), diag(m), upper(m), rhs(m);
  for (int k = 0; k < nt; ++k) {
    double tm = (k + 0.5) * dt;
    for (size_t i = 0; i < m; ++i) {
      lower[i] = -r;
      diag[i] = 1.0 + 2.0 * r;
      upper[i] = -r;
      size_t j = i + 1;
      double lap = u[j - 1] - 2.0 * u[j] + u[j + 1];
      double f = (std::exp(-tm) - M_PI * M_PI) * std::sin(M_PI * xs[j]);
      rhs[i] = u[j] + r * lap + dt * f;
    }
    solve_tridiagonal(lower, diag, upper, rhs);
    for (size_t i = 0; i < m; ++i) u[i + 1] = rhs[i];
    u.front() = 0.0;
    u.back() = 0.0;
    field.values.insert(field.values.end(), u.begin(), u.end());
  }

  ReferenceTable table;
  table.problem = "diffusion1d";
  table.resolution = n;
  table.solver_version = kSolverVersion;
  table.fields = {std::move(field)};
  return table;
}

// Spherically symmetric diffusion c_t = (D/r^2)(r^2 c_r)_r on r in [0,1],
// finite volume over cells centered at (i+1/2)dr so boundary face fluxes
// (zero at r=0, the given constant at r=1) enter the update exactly.
ReferenceField solve_radial(const std::string& name, double D, double c0,
                            double outer_flux, int n, int nt) {
  double dr = 1.0 / n;
  double dt = 1.0 / nt;
  std::vector<double> centers(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) centers[static_cast<size_t>(i)] = (i + 0.5) * dr;
  std::vector<double> ts(static_cast<size_t>(nt) + 1);
  for (int k = 0; k <= nt; ++k) ts[static_cast<size_t>(k)] = k * dt;

  // face areas r^2 and cell volumes (r_outer^3 - r_inner^3)/3
  std::vector<double> face_r2(static_cast<size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) face_r2[static_cast<size_t>(i)] = (i * dr) * (i * dr);
  std::vector<double> vol(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double a = i * dr, b = (i + 1) * dr;
    vol[static_cast<size_t>(i)] = (b * b * b - a * a * a) / 3.0;
  }

  std::vector<double> c(static_cast<size_t>(n), c0);
  ReferenceField field;
  field.dvar = name;
  field.grids = {ts, centers};
  field.values.insert(field.values.end(), c.begin(), c.end());

  // interior flux F_i = D face_r2[i] (c_i - c_{i-1})/dr; boundary F_0 = 0,
  // F_n = D * 1^2 * outer_flux (since flux BC prescribes c_r at r=1)
  double boundary = D * face_r2[static_cast<size_t>(n)] * outer_flux;
  std::vector<double> lower(static_cast<size_t>(n)), diag(static_cast<size_t>(n)),
      upper(static_cast<size_t>(n)), rhs(static_cast<size_t>(n));
  for (int k = 0; k < nt; ++k) {
    for (int i = 0; i < n; ++i) {
      size_t is = static_cast<size_t>(i);
      double aw = i > 0 ? D * face_r2[is] / dr : 0.0;        // west face coeff
      double ae = i < n - 1 ? D * face_r2[is + 1] / dr : 0.0;  // east face coeff
      double expl = aw * (i > 0 ? c[is - 1] - c[is] : 0.0) +
                    ae * (i < n - 1 ? c[is + 1] - c[is] : 0.0);
      if (i == n - 1) expl += boundary;
      double vdt = vol[is] / dt;
      lower[is] = -0.5 * aw;
      upper[is] = -0.5 * ae;
      diag[is] = vdt + 0.5 * (aw + ae);
      rhs[is] = vdt * c[is] + 0.5 * expl + (i == n - 1 ? 0.5 * boundary : 0.0);
    }
    solve_tridiagonal(lower, diag, upper, rhs);
    c = rhs;
    field.values.insert(field.values.end(), c.begin(), c.end());
  }
  return field;
}

ReferenceTable solve_spm(int n) {
  ReferenceTable table;
  table.problem = "spm";
  table.resolution = n;
  table.solver_version = kSolverVersion;

  // q(t) = 4.27249308415467 t exactly
  ReferenceField q;
  q.dvar = "q";
  std::vector<double> ts(static_cast<size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) ts[static_cast<size_t>(k)] = static_cast<double>(k) / n;
  q.grids = {ts};
  for (double t : ts) q.values.push_back(4.27249308415467 * t);
  table.fields.push_back(std::move(q));

  table.fields.push_back(
      solve_radial("csn", 8.813457647415216, 0.8, -0.14182855923368468, n, n));
  table.fields.push_back(
      solve_radial("csp", 22.598609352346717, 0.6, 0.03237700710041634, n, n));
  return table;
}

double p2d_source(double x) {
  if (x < 0.4445) return 1.0;
  if (x < 0.5555) return 0.0;
  return -1.0;
}

ReferenceTable solve_reduced_p2d(int n) {
  // ce_t = ce_xx + f(x) with zero-flux ends; phie from the elliptic constraint
  // phie_xx = ce_xx - f(x), phie(0)=0, phie_x(1)=0.
  double dx = 1.0 / n;
  int nt = n;
  double dt = 1.0 / nt;
  std::vector<double> xs(static_cast<size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) xs[static_cast<size_t>(j)] = j * dx;
  std::vector<double> ts(static_cast<size_t>(nt) + 1);
  for (int k = 0; k <= nt; ++k) ts[static_cast<size_t>(k)] = k * dt;

  std::vector<double> f(xs.size());
  for (size_t j = 0; j < xs.size(); ++j) f[j] = p2d_source(xs[j]);

  std::vector<double> c(xs.size(), 1.0);

  auto laplacian = [&](const std::vector<double>& v, size_t j) {
    // Neumann ghosts: v[-1] = v[1], v[n+1] = v[n-1]
    double left = j == 0 ? v[1] : v[j - 1];
    double right = j == xs.size() - 1 ? v[xs.size() - 2] : v[j + 1];
    return (left - 2.0 * v[j] + right) / (dx * dx);
  };

  auto solve_phie = [&](const std::vector<double>& ce) {
    size_t m = xs.size();
    std::vector<double> lower(m), diag(m), upper(m), rhs(m);
    for (size_t j = 0; j < m; ++j) rhs[j] = laplacian(ce, j) - f[j];
    // phie(0) = 0
    diag[0] = 1.0;
    upper[0] = 0.0;
    rhs[0] = 0.0;
    for (size_t j = 1; j + 1 < m; ++j) {
      lower[j] = 1.0 / (dx * dx);
      diag[j] = -2.0 / (dx * dx);
      upper[j] = 1.0 / (dx * dx);
    }
    // phie_x(1) = 0 via ghost: 2 phie_{n-1} - 2 phie_n
    lower[m - 1] = 2.0 / (dx * dx);
    diag[m - 1] = -2.0 / (dx * dx);
    solve_tridiagonal(lower, diag, upper, rhs);
    return rhs;
  };

  ReferenceField ce_field, phie_field;
  ce_field.dvar = "ce";
  phie_field.dvar = "phie";
  ce_field.grids = {ts, xs};
  phie_field.grids = {ts, xs};
  ce_field.values.insert(ce_field.values.end(), c.begin(), c.end());
  {
    auto p = solve_phie(c);
    phie_field.values.insert(phie_field.values.end(), p.begin(), p.end());
  }

  size_t m = xs.size();
  double r = dt / (2.0 * dx * dx);
  std::vector<double> lower(m), diag(m), upper(m), rhs(m);
  for (int k = 0; k < nt; ++k) {
    for (size_t j = 0; j < m; ++j) {
      lower[j] = -r;
      diag[j] = 1.0 + 2.0 * r;
      upper[j] = -r;
      rhs[j] = c[j] + 0.5 * dt * laplacian(c, j) + dt * f[j];
    }
    // fold the Neumann ghosts into the implicit operator
    upper[0] = -2.0 * r;
    lower[0] = 0.0;
    lower[m - 1] = -2.0 * r;
    upper[m - 1] = 0.0;
    solve_tridiagonal(lower, diag, upper, rhs);
    c = rhs;
    ce_field.values.insert(ce_field.values.end(), c.begin(), c.end());
    auto p = solve_phie(c);
    phie_field.values.insert(phie_field.values.end(), p.begin(), p.end());
  }

  ReferenceTable table;
  table.problem = "reduced_p2d";
  table.resolution = n;
  table.solver_version = kSolverVersion;
  table.fields = {std::move(ce_field), std::move(phie_field)};
  return table;
}

}  // namespace

size_t ReferenceField::index(std::span<const size_t> idx) const {
  size_t flat = 0;
  for (size_t a = 0; a < grids.size(); ++a) flat = flat * grids[a].size() + idx[a];
  return flat;
}

double ReferenceField::interpolate(std::span<const double> coords) const {
  size_t dims = grids.size();
  std::vector<size_t> base(dims);
  std::vector<double> frac(dims);
  for (size_t a = 0; a < dims; ++a) {
    const auto& g = grids[a];
    double c = coords[a];
    if (c <= g.front()) {
      base[a] = 0;
      frac[a] = 0.0;
    } else if (c >= g.back()) {
      base[a] = g.size() - 2;
      frac[a] = 1.0;
    } else {
      size_t lo = 0, hi = g.size() - 1;
      while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        (g[mid] <= c ? lo : hi) = mid;
      }
      base[a] = lo;
      frac[a] = (c - g[lo]) / (g[lo + 1] - g[lo]);
    }
    if (g.size() == 1) {
      base[a] = 0;
      frac[a] = 0.0;
    }
  }
  double acc = 0.0;
  for (size_t corner = 0; corner < (size_t{1} << dims); ++corner) {
    double w = 1.0;
    std::vector<size_t> idx(dims);
    for (size_t a = 0; a < dims; ++a) {
      bool hi = (corner >> a) & 1;
      w *= hi ? frac[a] : 1.0 - frac[a];
      idx[a] = base[a] + (hi && grids[a].size() > 1 ? 1 : 0);
    }
    if (w != 0.0) acc += w * values[index(idx)];
  }
  return acc;
}

const ReferenceField* ReferenceTable::field(const std::string& dvar) const {
  for (const auto& f : fields)
    if (f.dvar == dvar) return &f;
  return nullptr;
}

ReferenceTable reference_solve(const std::string& id, int resolution) {
  if (resolution < 32)
    throw std::invalid_argument("reference_solve: resolution must be >= 32");
  if (id == "diffusion1d") return solve_diffusion1d(resolution);
  if (id == "spm") return solve_spm(resolution);
  if (id == "reduced_p2d") return solve_reduced_p2d(resolution);
  throw std::invalid_argument("reference_solve: no reference solver for '" + id + "'");
}

void save_reference_csv(const ReferenceTable& table, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "# problem: " << table.problem << "\n";
  f << "# resolution: " << table.resolution << "\n";
  f << "# solver: " << table.solver_version << "\n";
  char buf[64];
  for (const auto& field : table.fields) {
    std::vector<size_t> idx(field.grids.size(), 0);
    size_t count = field.values.size();
    for (size_t flat = 0; flat < count; ++flat) {
      f << field.dvar;
      size_t rem = flat;
      for (size_t a = field.grids.size(); a-- > 0;) {
        idx[a] = rem % field.grids[a].size();
        rem /= field.grids[a].size();
      }
      for (size_t a = 0; a < field.grids.size(); ++a) {
        std::snprintf(buf, sizeof buf, ",%.17g", field.grids[a][idx[a]]);
        f << buf;
      }
      std::snprintf(buf, sizeof buf, ",%.17g\n", field.values[flat]);
      f << buf;
    }
  }
}

ReferenceTable load_reference_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  ReferenceTable table;
  std::string line;
  // 3-line header
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(f, line)) throw std::runtime_error(path + ": truncated header");
    size_t colon = line.find(':');
    if (line.rfind("# problem", 0) == 0) table.problem = line.substr(colon + 2);
    else if (line.rfind("# resolution", 0) == 0)
      table.resolution = std::stoi(line.substr(colon + 2));
    else if (line.rfind("# solver", 0) == 0) table.solver_version = line.substr(colon + 2);
    else throw std::runtime_error(path + ": bad header line: " + line);
  }
  struct Raw {
    std::vector<std::set<double>> axes;
    std::map<std::vector<double>, double> points;
  };
  std::map<std::string, Raw> raws;
  std::vector<std::string> order;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string name, tok;
    std::getline(ss, name, ',');
    std::vector<double> nums;
    while (std::getline(ss, tok, ',')) nums.push_back(std::stod(tok));
    if (nums.size() < 2) throw std::runtime_error(path + ": bad row: " + line);
    if (!raws.count(name)) order.push_back(name);
    Raw& raw = raws[name];
    size_t dims = nums.size() - 1;
    raw.axes.resize(dims);
    std::vector<double> coords(nums.begin(), nums.end() - 1);
    for (size_t a = 0; a < dims; ++a) raw.axes[a].insert(coords[a]);
    raw.points[coords] = nums.back();
  }
  for (const auto& name : order) {
    Raw& raw = raws[name];
    ReferenceField field;
    field.dvar = name;
    size_t total = 1;
    for (auto& axis : raw.axes) {
      field.grids.emplace_back(axis.begin(), axis.end());
      total *= axis.size();
    }
    if (raw.points.size() != total)
      throw std::runtime_error(path + ": field '" + name + "' is not a full grid");
    field.values.resize(total);
    std::vector<size_t> idx(field.grids.size(), 0);
    std::vector<double> coords(field.grids.size());
    for (size_t flat = 0; flat < total; ++flat) {
      size_t rem = flat;
      for (size_t a = field.grids.size(); a-- > 0;) {
        idx[a] = rem % field.grids[a].size();
        rem /= field.grids[a].size();
      }
      for (size_t a = 0; a < field.grids.size(); ++a)
        coords[a] = field.grids[a][idx[a]];
      field.values[flat] = raw.points.at(coords);
    }
    table.fields.push_back(std::move(field));
  }
  return table;
}

LorenzTrajectory lorenz_reference(double sigma, double rho, double beta, double t_end,
                                  double dt_fine, int stride) {
  LorenzTrajectory out;
  double x = 1.0, y = 0.0, z = 0.0;
  auto fx = [&](double X, double Y, double) { return sigma * (Y - X); };
  auto fy = [&](double X, double Y, double Z) { return X * (rho - Z) - Y; };
  auto fz = [&](double X, double Y, double Z) { return X * Y - beta * Z; };
  long steps = std::lround(t_end / dt_fine);
  out.t.push_back(0.0);
  out.x.push_back(x);
  out.y.push_back(y);
  out.z.push_back(z);
  for (long k = 1; k <= steps; ++k) {
    double k1x = fx(x, y, z), k1y = fy(x, y, z), k1z = fz(x, y, z);
    double x2 = x + 0.5 * dt_fine * k1x, y2 = y + 0.5 * dt_fine * k1y,
           z2 = z + 0.5 * dt_fine * k1z;
    double k2x = fx(x2, y2, z2), k2y = fy(x2, y2, z2), k2z = fz(x2, y2, z2);
    double x3 = x + 0.5 * dt_fine * k2x, y3 = y + 0.5 * dt_fine * k2y,
           z3 = z + 0.5 * dt_fine * k2z;
    double k3x = fx(x3, y3, z3), k3y = fy(x3, y3, z3), k3z = fz(x3, y3, z3);
    double x4 = x + dt_fine * k3x, y4 = y + dt_fine * k3y, z4 = z + dt_fine * k3z;
    double k4x = fx(x4, y4, z4), k4y = fy(x4, y4, z4), k4z = fz(x4, y4, z4);
    x += dt_fine / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    y += dt_fine / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    z += dt_fine / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z);
    if (k % stride == 0) {
      out.t.push_back(static_cast<double>(k) * dt_fine);
      out.x.push_back(x);
      out.y.push_back(y);
      out.z.push_back(z);
    }
  }
  return out;
}

}  // namespace pinn
