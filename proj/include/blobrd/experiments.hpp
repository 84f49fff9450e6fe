#pragma once

// Calibration and validation studies for reactive blobs in 3-D: reactive
// radius, far-field decay in a Dirichlet box, cubic and random dispersions,
// and the finite reaction-rate relation between Omega and P.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "blobrd/error.hpp"
#include "blobrd/grid.hpp"
#include "blobrd/kernels.hpp"
#include "blobrd/solvers.hpp"

namespace blobrd
{

inline constexpr double kPi = std::numbers::pi;

/// Leading finite-size coefficient of the cubic-lattice expansion, 1.76 (4 pi / 3)^(1/3).
inline constexpr double kLatticeCoefficient = 2.84;

/// Corner-blob reactive radii (units of h) for the 7-point Laplacian.
inline double calibrated_radius(KernelKind k)
{
  return k == KernelKind::FourPoint ? 1.27 : 0.885;
}

/// Tabular experiment output: named numeric columns plus string metadata.
struct ExperimentResult
{
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, std::string> metadata;
  ConvergenceHistory history;
  std::int64_t total_cycles = 0;
  bool unphysical = false;
  bool converged = true;

  void add_row(std::vector<double> row)
  {
    if (row.size() != columns.size())
    {
      throw ConfigError("row width does not match column count in " + name);
    }
    rows.push_back(std::move(row));
  }

  std::size_t column(const std::string &c) const
  {
    const auto it = std::find(columns.begin(), columns.end(), c);
    if (it == columns.end())
    {
      throw ConfigError("no column '" + c + "' in " + name);
    }
    return static_cast<std::size_t>(it - columns.begin());
  }

  double at(std::size_t row, const std::string &c) const { return rows.at(row).at(column(c)); }

  void absorb(const SolveStats &s)
  {
    history.append(s.history, total_cycles);
    total_cycles += s.cycles;
    converged = converged && s.converged;
  }
};

/// Volume fraction of N spheres of radius a in volume V.
inline double volume_fraction(std::size_t n, double a, double volume)
{
  return static_cast<double>(n) * (4.0 / 3.0) * kPi * a * a * a / volume;
}

/// Cubic-lattice fit beta_0(phi) = 1 + 1.76 phi^1/3 + 1.76^2 phi^2/3 + b phi + c phi^4/3.
inline double cubic_beta0_fit(double phi, double b = -0.92, double c = 17.4)
{
  const double t = std::cbrt(phi);
  return 1.0 + 1.76 * t + 1.76 * 1.76 * t * t + b * phi + c * phi * t;
}

/// Finite-size radius a_L = a [1 + x + x^2], x = 2.84 a / (L h).
inline double finite_size_radius(double a, double box_length)
{
  const double x = kLatticeCoefficient * a / box_length;
  return a * (1.0 + x + x * x);
}

/// Single-size extrapolation a = a_L - 2.84 a_L^2 / (L h).
inline double extrapolate_radius(double a_l, double box_length)
{
  return a_l - kLatticeCoefficient * a_l * a_l / box_length;
}

/// Least-squares a from (box length, a_L) pairs using the three-term series.
inline double fit_radius(const std::vector<std::pair<double, double>> &data)
{
  if (data.empty())
  {
    throw ConfigError("radius fit needs at least one system size");
  }
  double a = extrapolate_radius(data.front().second, data.front().first);
  for (int iter = 0; iter < 50; ++iter)
  {
    double num = 0.0, den = 0.0;
    for (const auto &[len, al] : data)
    {
      const double x = kLatticeCoefficient / len;
      const double model = finite_size_radius(a, len);
      const double dmodel = 1.0 + 2.0 * x * a + 3.0 * x * x * a * a;
      num += dmodel * (model - al);
      den += dmodel * dmodel;
    }
    const double step = num / den;
    a -= step;
    if (std::abs(step) <= 1e-15 * std::abs(a))
    {
      break;
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// beta_0 from a steady periodic diffusion-limited solve

struct Beta0Measurement
{
  double beta0 = 0.0;
  double cbar = 0.0;
  double phi = 0.0;
  bool unphysical = false;
  SolveStats stats;
};

inline SolverOptions study_defaults()
{
  SolverOptions o;
  o.precond = SaddlePrecond::ApproxSchur;
  o.m = 5;
  o.n = 1;
  o.rtol = 1e-9;
  return o;
}

/// Steady saddle solve with uniform source s; beta_0 uses the mean of c over
/// all cells, including blob interiors.
inline Beta0Measurement measure_beta0(const BlobSet &blobs, double a, double chi = 1.0,
                                      double s = 0.0, const SolverOptions &opts = study_defaults())
{
  const GridSpec &g = blobs.grid();
  if (!g.periodic())
  {
    throw ConfigError("beta_0 is measured on periodic grids");
  }
  if (blobs.size() == 0)
  {
    throw ConfigError("beta_0 needs at least one blob");
  }
  const double vol = g.domain_volume();
  if (s == 0.0)
  {
    s = 1.0 / vol;
  }
  ReactionSystem sys = ReactionSystem::steady(blobs, chi, ScalarField(g, s));
  SaddleSolution sol = solve_saddle(sys, opts);

  Beta0Measurement m;
  m.stats = sol.stats;
  m.cbar = mean(sol.c);
  m.phi = volume_fraction(blobs.size(), a, vol);
  m.beta0 = (s * a * a / chi) * ((1.0 - m.phi) / (3.0 * m.phi)) / m.cbar;
  m.unphysical = !(m.cbar > 0.0);
  return m;
}

// ---------------------------------------------------------------------------
// Reactive radius

struct RadiusCalibration
{
  ExperimentResult table;           // one row per (offset, L)
  std::vector<double> fitted;       // a/h per offset, from the series fit over sizes
  std::vector<double> extrapolated; // a/h per offset, single-size extrapolation at the largest L
};

/// Single diffusion-limited blob in periodic boxes of L^3 cells placed at
/// box center (a cell corner for even L) plus each offset (units of h).
inline RadiusCalibration calibrate_radius(KernelKind kernel, const std::vector<Vec3> &offsets,
                                          const std::vector<int> &sizes, double h = 1.0,
                                          double chi = 1.0,
                                          const SolverOptions &opts = study_defaults())
{
  if (sizes.empty() || offsets.empty())
  {
    throw ConfigError("radius calibration needs sizes and offsets");
  }
  RadiusCalibration out;
  out.table.name = "calibrate-radius";
  out.table.columns = {"offset", "dx",   "dy",        "dz",
                       "L",      "cbar", "aL_over_h", "a_extrap_over_h",
                       "a_fit_over_h"};
  out.table.metadata["kernel"] = std::to_string(support_width(kernel));

  for (std::size_t oi = 0; oi < offsets.size(); ++oi)
  {
    const Vec3 &off = offsets[oi];
    const std::size_t first_row = out.table.rows.size();
    std::vector<std::pair<double, double>> data;
    double last_extrap = 0.0;
    for (int L : sizes)
    {
      const GridSpec g = GridSpec::cube(3, L, h);
      const double c0 = 0.5 * L * h;
      BlobSet b(g, kernel, {Vec3{c0 + off[0] * h, c0 + off[1] * h, c0 + off[2] * h}});
      ReactionSystem sys = ReactionSystem::steady(b, chi, ScalarField(g, 1.0 / g.domain_volume()));
      SaddleSolution sol = solve_saddle(sys, opts);
      out.table.absorb(sol.stats);
      const double cbar = mean(sol.c);
      const double a_l = 1.0 / (4.0 * kPi * chi * cbar);
      const double ex = extrapolate_radius(a_l, L * h);
      data.emplace_back(L * h, a_l);
      last_extrap = ex / h;
      out.table.add_row({double(oi), off[0], off[1], off[2], double(L), cbar, a_l / h, ex / h, 0.0});
    }
    out.fitted.push_back(fit_radius(data) / h);
    for (std::size_t r = first_row; r < out.table.rows.size(); ++r)
    {
      out.table.rows[r].back() = out.fitted.back();
    }
    out.extrapolated.push_back(last_extrap);
  }
  return out;
}

/// Displacements (units of h) from a cell corner used for translational
/// invariance studies: moves from a cell center along x, the xy face
/// diagonal and the body diagonal.
inline std::vector<Vec3> displacement_samples()
{
  std::vector<Vec3> out;
  const Vec3 center{0.5, 0.5, 0.5};
  out.push_back(center);
  const std::array<Vec3, 3> dirs{Vec3{1, 0, 0}, Vec3{1, 1, 0}, Vec3{1, 1, 1}};
  for (const Vec3 &d : dirs)
  {
    for (double t : {0.125, 0.25, 0.375, 0.5})
    {
      out.push_back({center[0] + t * d[0], center[1] + t * d[1], center[2] + t * d[2]});
    }
  }
  return out;
}

/// Distance from q (units of h, measured from a corner) to the nearest cell center.
inline double distance_to_cell_center(const Vec3 &q)
{
  double s = 0.0;
  for (double x : q)
  {
    const double f = x - std::floor(x) - 0.5;
    s += f * f;
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Field sampling

/// Trilinear interpolation of a cell-centered field at point p. Periodic
/// grids wrap; Dirichlet grids use ghost values 2 c_b - interior.
inline double sample_field(const ScalarField &f, const Vec3 &p)
{
  const GridSpec &g = f.spec();
  const double h = g.spacing();
  const int d = g.dim();
  std::array<int, 3> lo{0, 0, 0};
  std::array<double, 3> t{0, 0, 0};
  for (int a = 0; a < d; ++a)
  {
    const double x = p[a] / h - 0.5;
    lo[a] = static_cast<int>(std::floor(x));
    t[a] = x - lo[a];
  }
  auto value = [&](int i, int j, int k) {
    std::array<int, 3> idx{i, j, k};
    bool ghost = false;
    int ghost_count = 0;
    for (int a = 0; a < d; ++a)
    {
      const int n = g.cells(a);
      if (g.periodic())
      {
        idx[a] = ((idx[a] % n) + n) % n;
      }
      else if (idx[a] < 0 || idx[a] >= n)
      {
        idx[a] = idx[a] < 0 ? 0 : n - 1;
        ghost = true;
        ++ghost_count;
      }
    }
    const double v = f.at(idx[0], idx[1], d == 3 ? idx[2] : 0);
    if (!ghost)
    {
      return v;
    }
    // edges and corners: reflect once per crossed face
    double cb = g.boundary().value;
    double out = v;
    for (int c = 0; c < ghost_count; ++c)
    {
      out = 2.0 * cb - out;
    }
    return out;
  };
  double s = 0.0;
  const int kz = d == 3 ? 1 : 0;
  for (int dk = 0; dk <= kz; ++dk)
  {
    for (int dj = 0; dj <= 1; ++dj)
    {
      for (int di = 0; di <= 1; ++di)
      {
        const double w = (di ? t[0] : 1.0 - t[0]) * (dj ? t[1] : 1.0 - t[1]) *
                         (d == 3 ? (dk ? t[2] : 1.0 - t[2]) : 1.0);
        s += w * value(lo[0] + di, lo[1] + dj, lo[2] + dk);
      }
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Decay profile in a Dirichlet box

/// c(r)/c_inf ~ L/(L - 2a) (1 - a/r) for a sink of radius a in a box of side L.
inline double decay_theory(double r, double a, double box_length)
{
  return box_length / (box_length - 2.0 * a) * (1.0 - a / r);
}

struct DecayProfile
{
  ExperimentResult table;  // direction (0 axis, 1 diagonal), r_over_h, c_over_cinf, theory
  ScalarField field;
};

inline DecayProfile decay_profile(int L, KernelKind kernel, double c_inf, double a_over_h,
                                  double h = 1.0, double chi = 1.0,
                                  const SolverOptions &opts = study_defaults())
{
  if (c_inf == 0.0)
  {
    throw ConfigError("decay profile needs a non-zero boundary concentration");
  }
  const GridSpec g = GridSpec::cube(3, L, h, Boundary::dirichlet(c_inf));
  const double c0 = 0.5 * L * h;
  const Vec3 center{c0, c0, c0};
  BlobSet b(g, kernel, {center});
  ReactionSystem sys = ReactionSystem::steady(b, chi);
  SaddleSolution sol = solve_saddle(sys, opts);

  DecayProfile out{{}, sol.c};
  out.table.name = "decay-profile";
  out.table.columns = {"direction", "r_over_h", "c_over_cinf", "theory"};
  out.table.metadata["kernel"] = std::to_string(support_width(kernel));
  out.table.metadata["a_over_h"] = std::to_string(a_over_h);
  out.table.absorb(sol.stats);

  const double a = a_over_h * h;
  const double box = L * h;
  const std::array<Vec3, 2> dirs{Vec3{1, 0, 0}, Vec3{1 / std::sqrt(3.0), 1 / std::sqrt(3.0),
                                                   1 / std::sqrt(3.0)}};
  for (int di = 0; di < 2; ++di)
  {
    const double rmax = di == 0 ? 0.5 * box : 0.5 * std::sqrt(3.0) * box;
    for (double r = 0.5 * h; r <= rmax + 1e-12 * h; r += 0.5 * h)
    {
      const Vec3 p{center[0] + r * dirs[di][0], center[1] + r * dirs[di][1],
                   center[2] + r * dirs[di][2]};
      out.table.add_row({double(di), r / h, sample_field(sol.c, p) / c_inf,
                         decay_theory(r, a, box)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite reaction rate

struct OmegaStudy
{
  ExperimentResult table;  // P, kappa, cbar, Omega, beta_P
  double beta0 = 0.0;
  double phi = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
};

/// Omega = [(s a^2/chi)(1-phi)/(3 phi)/cbar]^-1 for a single blob with
/// kappa = 4 pi chi a / P. The P = 0 point comes from the saddle solve.
inline OmegaStudy measure_omega(int L, KernelKind kernel, double a_over_h,
                                const std::vector<double> &p_values, double h = 1.0,
                                double chi = 1.0, const SolverOptions &opts = study_defaults())
{
  const GridSpec g = GridSpec::cube(3, L, h);
  const double c0 = 0.5 * L * h;
  const Vec3 q{c0, c0, c0};
  const double a = a_over_h * h;
  const double vol = g.domain_volume();
  const double s = 1.0 / vol;

  OmegaStudy out;
  out.table.name = "finite-p";
  out.table.columns = {"P", "kappa", "cbar", "Omega", "beta_P"};
  out.table.metadata["kernel"] = std::to_string(support_width(kernel));

  const Beta0Measurement m0 = measure_beta0(BlobSet(g, kernel, {q}), a, chi, s, opts);
  out.table.absorb(m0.stats);
  out.table.unphysical = m0.unphysical;
  out.beta0 = m0.beta0;
  out.phi = m0.phi;
  const double pref = (s * a * a / chi) * (1.0 - out.phi) / (3.0 * out.phi);
  out.table.add_row({0.0, kDiffusionLimited, m0.cbar, m0.cbar / pref, 1.0 / (m0.cbar / pref)});

  std::vector<std::pair<double, double>> pts;
  for (double p : p_values)
  {
    if (!(p > 0.0))
    {
      throw ConfigError("finite P values must be positive");
    }
    const double kappa = 4.0 * kPi * chi * a / p;
    BlobSet b(g, kernel, {q}, kappa);
    ReactionSystem sys = ReactionSystem::steady(b, chi, ScalarField(g, s));
    ReactionSolution sol = solve_steady_finite_kappa(sys, opts);
    out.table.absorb(sol.stats);
    const double cbar = mean(sol.c);
    const double omega = cbar / pref;
    out.table.add_row({p, kappa, cbar, omega, (1.0 + p) / omega});
    pts.emplace_back(p, omega);
  }

  // least squares Omega = intercept + slope P
  if (pts.size() >= 2)
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto &[x, y] : pts)
    {
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.intercept = (sy - out.slope * sx) / n;
  }
  out.table.metadata["slope"] = std::to_string(out.slope);
  out.table.metadata["intercept"] = std::to_string(out.intercept);
  return out;
}

// ---------------------------------------------------------------------------
// Cubic dispersions

struct CubicLattice
{
  int spacing = 0;    // lattice constant in cells
  int cells = 0;      // grid cells per axis
  int per_axis = 0;   // blobs per axis
  double phi = 0.0;   // achieved volume fraction
  std::vector<Vec3> positions;
};

/// Simple-cubic arrangement near volume fraction `phi` for radius a (units
/// of h). The lattice constant is a whole number of cells so every blob sits
/// on a cell corner; the box holds the fewest blobs per axis that give at
/// least 4 cells.
inline CubicLattice cubic_lattice(double phi, double a_over_h)
{
  if (!(phi > 0.0 && phi < 0.5236))
  {
    throw ConfigError("cubic lattice volume fraction must lie in (0, pi/6)");
  }
  if (!(a_over_h > 0.0))
  {
    throw ConfigError("blob radius must be positive");
  }
  const double ideal = std::cbrt(4.0 * kPi * std::pow(a_over_h, 3) / (3.0 * phi));
  auto fraction = [&](int s) { return volume_fraction(1, a_over_h, double(s) * s * s); };
  int s = std::max(1, static_cast<int>(std::floor(ideal)));
  if (std::abs(fraction(s + 1) / phi - 1.0) < std::abs(fraction(s) / phi - 1.0))
  {
    ++s;
  }
  // spheres must not overlap
  while (2.0 * a_over_h > s)
  {
    ++s;
  }
  CubicLattice best;
  best.spacing = s;
  best.per_axis = (4 + s - 1) / s;
  best.cells = best.per_axis * s;
  best.phi = fraction(s);
  const double step = best.spacing;
  for (int k = 0; k < best.per_axis; ++k)
  {
    for (int j = 0; j < best.per_axis; ++j)
    {
      for (int i = 0; i < best.per_axis; ++i)
      {
        best.positions.push_back({i * step, j * step, k * step});
      }
    }
  }
  return best;
}

inline ExperimentResult cubic_beta0(KernelKind kernel, const std::vector<double> &phis,
                                    double a_over_h, double h = 1.0, double chi = 1.0,
                                    const SolverOptions &opts = study_defaults())
{
  ExperimentResult out;
  out.name = "cubic-beta0";
  out.columns = {"phi_target", "phi", "spacing", "L", "cbar", "beta0", "beta0_fit",
                 "relative_error"};
  out.metadata["kernel"] = std::to_string(support_width(kernel));
  for (double phi : phis)
  {
    CubicLattice lat = cubic_lattice(phi, a_over_h);
    // lattice nodes are cell corners; scale to physical units
    for (auto &p : lat.positions)
    {
      for (auto &x : p)
      {
        x *= h;
      }
    }
    const GridSpec g = GridSpec::cube(3, lat.cells, h);
    const Beta0Measurement m = measure_beta0(BlobSet(g, kernel, lat.positions), a_over_h * h,
                                             chi, 0.0, opts);
    out.absorb(m.stats);
    out.unphysical = out.unphysical || m.unphysical;
    const double fit = cubic_beta0_fit(m.phi);
    out.add_row({phi, m.phi, double(lat.spacing), double(lat.cells), m.cbar, m.beta0, fit,
                 m.beta0 / fit - 1.0});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random dispersions

struct Packing
{
  std::vector<Vec3> centers;
  double radius = 0.0;
  Vec3 box{0, 0, 0};
  std::uint64_t seed = 0;

  double phi() const { return volume_fraction(centers.size(), radius, box[0] * box[1] * box[2]); }
};

/// Random sequential addition of non-overlapping spheres in a periodic box.
inline Packing generate_packing(double phi, double a, const Vec3 &box, std::uint64_t seed,
                                int attempts_per_sphere = 200000)
{
  if (!(phi > 0.0 && phi <= 0.35))
  {
    throw ConfigError("RSA packing supports target volume fractions in (0, 0.35]");
  }
  if (!(a > 0.0))
  {
    throw ConfigError("sphere radius must be positive");
  }
  const double vol = box[0] * box[1] * box[2];
  const auto target =
    static_cast<std::size_t>(std::llround(phi * vol / ((4.0 / 3.0) * kPi * a * a * a)));

  Packing out;
  out.radius = a;
  out.box = box;
  out.seed = seed;

  // cell list with bins no smaller than the contact distance 2a
  std::array<int, 3> nbin{};
  for (int d = 0; d < 3; ++d)
  {
    nbin[d] = std::max(1, static_cast<int>(std::floor(box[d] / (2.0 * a))));
  }
  std::vector<std::vector<std::size_t>> bins(static_cast<std::size_t>(nbin[0]) * nbin[1] * nbin[2]);
  auto bin_of = [&](const Vec3 &p, int d) {
    return std::min(nbin[d] - 1, static_cast<int>(p[d] / box[d] * nbin[d]));
  };
  auto bin_index = [&](int i, int j, int k) {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(nbin[0]) * (j + nbin[1] * static_cast<std::size_t>(k));
  };
  const double contact2 = 4.0 * a * a;
  auto overlaps = [&](const Vec3 &p) {
    const int bi = bin_of(p, 0), bj = bin_of(p, 1), bk = bin_of(p, 2);
    for (int dk = -1; dk <= 1; ++dk)
    {
      for (int dj = -1; dj <= 1; ++dj)
      {
        for (int di = -1; di <= 1; ++di)
        {
          const int i = ((bi + di) % nbin[0] + nbin[0]) % nbin[0];
          const int j = ((bj + dj) % nbin[1] + nbin[1]) % nbin[1];
          const int k = ((bk + dk) % nbin[2] + nbin[2]) % nbin[2];
          for (std::size_t s : bins[bin_index(i, j, k)])
          {
            double r2 = 0.0;
            for (int d = 0; d < 3; ++d)
            {
              double dx = p[d] - out.centers[s][d];
              dx -= box[d] * std::round(dx / box[d]);
              r2 += dx * dx;
            }
            if (r2 < contact2)
            {
              return true;
            }
          }
        }
      }
    }
    return false;
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (out.centers.size() < target)
  {
    bool placed = false;
    for (int t = 0; t < attempts_per_sphere && !placed; ++t)
    {
      const Vec3 p{unit(rng) * box[0], unit(rng) * box[1], unit(rng) * box[2]};
      if (!overlaps(p))
      {
        bins[bin_index(bin_of(p, 0), bin_of(p, 1), bin_of(p, 2))].push_back(out.centers.size());
        out.centers.push_back(p);
        placed = true;
      }
    }
    if (!placed)
    {
      throw ConfigError("RSA packing saturated at phi = " + std::to_string(out.phi()) +
                        " before reaching " + std::to_string(phi));
    }
  }
  return out;
}

/// Smallest pairwise center distance (minimum image), by direct O(N^2) scan.
inline double min_pair_distance(const Packing &p)
{
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.centers.size(); ++i)
  {
    for (std::size_t j = i + 1; j < p.centers.size(); ++j)
    {
      double r2 = 0.0;
      for (int d = 0; d < 3; ++d)
      {
        double dx = p.centers[i][d] - p.centers[j][d];
        dx -= p.box[d] * std::round(dx / p.box[d]);
        r2 += dx * dx;
      }
      best = std::min(best, std::sqrt(r2));
    }
  }
  return best;
}

/// Blobs at the sphere centers of a packing on a grid covering its box.
inline Beta0Measurement measure_beta0_random(const Packing &packing, const GridSpec &grid,
                                             KernelKind kernel, double chi = 1.0,
                                             const SolverOptions &opts = study_defaults())
{
  for (int d = 0; d < 3; ++d)
  {
    if (std::abs(grid.extent(d) - packing.box[d]) > 1e-9 * packing.box[d])
    {
      throw ConfigError("packing box does not match the grid extent");
    }
  }
  return measure_beta0(BlobSet(grid, kernel, packing.centers), packing.radius, chi, 0.0, opts);
}

// ---------------------------------------------------------------------------
// Preconditioner benchmark

/// Blobs every `spacing` cells on a cell-corner lattice (kernels of the 4-point
/// blobs just touch for spacing 4).
inline std::vector<Vec3> corner_lattice(const GridSpec &g, int spacing)
{
  std::vector<Vec3> out;
  const double h = g.spacing();
  const int nz = g.dim() == 3 ? g.cells(2) / spacing : 1;
  for (int k = 0; k < nz; ++k)
  {
    for (int j = 0; j < g.cells(1) / spacing; ++j)
    {
      for (int i = 0; i < g.cells(0) / spacing; ++i)
      {
        out.push_back({(spacing * i + 0.5 * spacing) * h, (spacing * j + 0.5 * spacing) * h,
                       g.dim() == 3 ? (spacing * k + 0.5 * spacing) * h : 0.0});
      }
    }
  }
  return out;
}

/// Saddle solve for a cubic blob array with a seeded standard-normal right-hand
/// side in both c and lambda. `steady` selects A = -chi L (singular); otherwise
/// the test operator chi((Lh)^-2 I - L).
inline SaddleSolution precond_bench(int L, int dim, int spacing, bool steady,
                                    const SolverOptions &opts, double chi = 1.0, double h = 1.0,
                                    std::uint64_t seed = 1)
{
  const GridSpec g = GridSpec::cube(dim, L, h);
  BlobSet b(g, KernelKind::FourPoint, corner_lattice(g, spacing));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ScalarField rhs(g);
  for (std::size_t i = 0; i < rhs.size(); ++i)
  {
    rhs[i] = normal(rng);
  }
  BlobVector f(b.size());
  for (std::size_t i = 0; i < f.size(); ++i)
  {
    f[i] = normal(rng);
  }
  ReactionSystem sys = steady ? ReactionSystem::steady(b, chi) : ReactionSystem::test_operator(b, chi);
  return solve_saddle(sys, rhs, f, opts);
}

}  // namespace blobrd
