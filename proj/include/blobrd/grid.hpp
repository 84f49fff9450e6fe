#pragma once

// Uniform cell-centered Cartesian grids, scalar fields and the discrete
// Laplacian.
//
// Index layout: row-major with x fastest, i.e. cell (i, j, k) is stored at
// i + n_x * (j + n_y * k). Two-dimensional grids use n_z = 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "blobrd/error.hpp"

namespace blobrd
{

using Vec3 = std::array<double, 3>;
using Index3 = std::array<int, 3>;

enum class BoundaryKind
{
  Periodic,
  Dirichlet
};

/// Boundary condition applied to the whole domain boundary.
struct Boundary
{
  BoundaryKind kind = BoundaryKind::Periodic;
  double value = 0.0;  // c_b, only meaningful for Dirichlet

  static Boundary periodic() { return {BoundaryKind::Periodic, 0.0}; }
  static Boundary dirichlet(double c_b) { return {BoundaryKind::Dirichlet, c_b}; }

  bool is_periodic() const { return kind == BoundaryKind::Periodic; }
  bool operator==(const Boundary &) const = default;
};

class GridSpec
{
public:
  GridSpec() = default;

  GridSpec(int dim, Index3 cells, double h, Boundary bc = Boundary::periodic())
    : dim_(dim), n_(cells), h_(h), bc_(bc)
  {
    if (dim != 2 && dim != 3)
    {
      throw ConfigError("grid dimension must be 2 or 3, got " + std::to_string(dim));
    }
    if (dim == 2)
    {
      n_[2] = 1;
    }
    for (int a = 0; a < dim; ++a)
    {
      if (n_[a] < 4)
      {
        throw ConfigError("grid needs at least 4 cells per axis, got " +
                          std::to_string(n_[a]));
      }
    }
    if (!(h > 0.0) || !std::isfinite(h))
    {
      throw ConfigError("grid spacing must be positive and finite");
    }
    if (!std::isfinite(bc.value))
    {
      throw ConfigError("Dirichlet boundary value must be finite");
    }
  }

  /// Cubic grid with `n` cells along every axis.
  static GridSpec cube(int dim, int n, double h, Boundary bc = Boundary::periodic())
  {
    return GridSpec(dim, {n, n, dim == 3 ? n : 1}, h, bc);
  }

  int dim() const { return dim_; }
  const Index3 &cells() const { return n_; }
  int cells(int axis) const { return n_[axis]; }
  double spacing() const { return h_; }
  const Boundary &boundary() const { return bc_; }
  bool periodic() const { return bc_.is_periodic(); }

  std::size_t cell_count() const
  {
    return static_cast<std::size_t>(n_[0]) * static_cast<std::size_t>(n_[1]) *
           static_cast<std::size_t>(n_[2]);
  }
  double cell_volume() const { return std::pow(h_, dim_); }
  double extent(int axis) const { return n_[axis] * h_; }
  double domain_volume() const { return static_cast<double>(cell_count()) * cell_volume(); }

  std::size_t index(int i, int j, int k = 0) const
  {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(n_[0]) *
             (static_cast<std::size_t>(j) + static_cast<std::size_t>(n_[1]) * k);
  }

  Index3 unravel(std::size_t idx) const
  {
    Index3 out{};
    out[0] = static_cast<int>(idx % n_[0]);
    idx /= n_[0];
    out[1] = static_cast<int>(idx % n_[1]);
    out[2] = static_cast<int>(idx / n_[1]);
    return out;
  }

  /// Cell center r_k = (k + 1/2) h per axis; unused axes are 0.
  Vec3 center(const Index3 &ijk) const
  {
    Vec3 r{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a)
    {
      r[a] = (ijk[a] + 0.5) * h_;
    }
    return r;
  }

  /// Same shape and spacing but homogeneous boundary data (c_b = 0).
  GridSpec homogeneous() const
  {
    GridSpec g = *this;
    if (!g.periodic())
    {
      g.bc_.value = 0.0;
    }
    return g;
  }

  GridSpec with_boundary(Boundary bc) const { return GridSpec(dim_, n_, h_, bc); }

  /// Grid with every axis halved and spacing doubled.
  GridSpec coarsened() const
  {
    Index3 c = n_;
    for (int a = 0; a < dim_; ++a)
    {
      c[a] /= 2;
    }
    return GridSpec(dim_, c, 2.0 * h_, bc_);
  }

  /// True if every axis is even and halving keeps at least 4 cells.
  bool can_coarsen() const
  {
    for (int a = 0; a < dim_; ++a)
    {
      if (n_[a] % 2 != 0 || n_[a] / 2 < 4)
      {
        return false;
      }
    }
    return true;
  }

  bool same_shape(const GridSpec &o) const
  {
    return dim_ == o.dim_ && n_ == o.n_ && h_ == o.h_ && bc_.kind == o.bc_.kind;
  }

  bool operator==(const GridSpec &) const = default;

private:
  int dim_ = 3;
  Index3 n_{4, 4, 4};
  double h_ = 1.0;
  Boundary bc_{};
};

/// Cell-centered scalar field (concentration) on a GridSpec.
class ScalarField
{
public:
  ScalarField() = default;
  explicit ScalarField(GridSpec spec, double fill = 0.0)
    : spec_(std::move(spec)), values_(spec_.cell_count(), fill)
  {
  }
  ScalarField(GridSpec spec, std::vector<double> values)
    : spec_(std::move(spec)), values_(std::move(values))
  {
    if (values_.size() != spec_.cell_count())
    {
      throw ConfigError("field value count does not match grid cell count");
    }
  }

  template <typename F>
  static ScalarField from_function(const GridSpec &spec, F &&f)
  {
    ScalarField out(spec);
    for (std::size_t idx = 0; idx < out.size(); ++idx)
    {
      out[idx] = f(spec.center(spec.unravel(idx)));
    }
    return out;
  }

  const GridSpec &spec() const { return spec_; }
  std::size_t size() const { return values_.size(); }
  double &operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double &at(int i, int j, int k = 0) { return values_[spec_.index(i, j, k)]; }
  double at(int i, int j, int k = 0) const { return values_[spec_.index(i, j, k)]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double> &storage() { return values_; }

  void fill(double v) { std::fill(values_.begin(), values_.end(), v); }

  ScalarField &operator+=(const ScalarField &o)
  {
    for (std::size_t i = 0; i < size(); ++i)
    {
      values_[i] += o.values_[i];
    }
    return *this;
  }
  ScalarField &operator-=(const ScalarField &o)
  {
    for (std::size_t i = 0; i < size(); ++i)
    {
      values_[i] -= o.values_[i];
    }
    return *this;
  }
  ScalarField &operator*=(double s)
  {
    for (auto &v : values_)
    {
      v *= s;
    }
    return *this;
  }
  ScalarField &operator+=(double s)
  {
    for (auto &v : values_)
    {
      v += s;
    }
    return *this;
  }

  friend ScalarField operator+(ScalarField a, const ScalarField &b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField &b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

  double max_abs() const
  {
    double m = 0.0;
    for (double v : values_)
    {
      m = std::max(m, std::abs(v));
    }
    return m;
  }

  bool all_finite() const
  {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

private:
  GridSpec spec_{};
  std::vector<double> values_;
};

// Vector-space operations used by the Krylov solvers (found by ADL).

inline double dot(const ScalarField &a, const ScalarField &b)
{
  double s = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i)
  {
    s += av[i] * bv[i];
  }
  return s;
}

/// y += alpha * x
inline void axpy(double alpha, const ScalarField &x, ScalarField &y)
{
  auto yv = y.values();
  const auto xv = x.values();
  for (std::size_t i = 0; i < yv.size(); ++i)
  {
    yv[i] += alpha * xv[i];
  }
}

inline void scale(ScalarField &x, double alpha) { x *= alpha; }

inline ScalarField zeros_like(const ScalarField &x) { return ScalarField(x.spec()); }

inline double norm(const ScalarField &f) { return std::sqrt(dot(f, f)); }

inline double mean(const ScalarField &f)
{
  const auto v = f.values();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline ScalarField subtract_mean(ScalarField f)
{
  f += -mean(f);
  return f;
}

namespace detail
{

/// Neighbor tables for one axis; -1 marks a ghost cell across a Dirichlet face.
struct AxisNeighbors
{
  std::vector<int> minus, plus;
};

inline AxisNeighbors axis_neighbors(int n, bool periodic)
{
  AxisNeighbors nb;
  nb.minus.resize(n);
  nb.plus.resize(n);
  for (int i = 0; i < n; ++i)
  {
    nb.minus[i] = i > 0 ? i - 1 : (periodic ? n - 1 : -1);
    nb.plus[i] = i < n - 1 ? i + 1 : (periodic ? 0 : -1);
  }
  return nb;
}

/// out = beta * u - chi * L u, with L the (2d+1)-point Laplacian. Ghost values
/// across Dirichlet faces are 2 c_b - interior.
inline void apply_helmholtz_raw(const GridSpec &spec, double beta, double chi,
                                std::span<const double> u, std::span<double> out)
{
  const int nx = spec.cells(0), ny = spec.cells(1), nz = spec.cells(2);
  const bool per = spec.periodic();
  const double cb = per ? 0.0 : spec.boundary().value;
  const double inv_h2 = 1.0 / (spec.spacing() * spec.spacing());
  const double diag = beta + chi * 2.0 * spec.dim() * inv_h2;
  const double off = chi * inv_h2;
  const auto X = axis_neighbors(nx, per);
  const auto Y = axis_neighbors(ny, per);
  const auto Z = axis_neighbors(nz, per);
  const bool three = spec.dim() == 3;
  const std::size_t sy = nx, sz = static_cast<std::size_t>(nx) * ny;

  for (int k = 0; k < nz; ++k)
  {
    for (int j = 0; j < ny; ++j)
    {
      const std::size_t row = sy * j + sz * k;
      for (int i = 0; i < nx; ++i)
      {
        const std::size_t c = row + i;
        const double uc = u[c];
        double nbsum = 0.0;
        nbsum += X.minus[i] >= 0 ? u[row + X.minus[i]] : 2.0 * cb - uc;
        nbsum += X.plus[i] >= 0 ? u[row + X.plus[i]] : 2.0 * cb - uc;
        nbsum += Y.minus[j] >= 0 ? u[c - sy * j + sy * Y.minus[j]] : 2.0 * cb - uc;
        nbsum += Y.plus[j] >= 0 ? u[c - sy * j + sy * Y.plus[j]] : 2.0 * cb - uc;
        if (three)
        {
          nbsum += Z.minus[k] >= 0 ? u[c - sz * k + sz * Z.minus[k]] : 2.0 * cb - uc;
          nbsum += Z.plus[k] >= 0 ? u[c - sz * k + sz * Z.plus[k]] : 2.0 * cb - uc;
        }
        out[c] = diag * uc - off * nbsum;
      }
    }
  }
}

}  // namespace detail

/// Discrete Laplacian L f. Dirichlet grids use the boundary value stored in
/// the field's GridSpec, so the map is affine for c_b != 0.
inline ScalarField apply_laplacian(const ScalarField &f)
{
  ScalarField out(f.spec());
  detail::apply_helmholtz_raw(f.spec(), 0.0, -1.0, f.values(), out.values());
  return out;
}

/// (beta I - chi L) f.
inline ScalarField apply_helmholtz(const ScalarField &f, double beta, double chi)
{
  if (beta < 0.0)
  {
    throw ConfigError("Helmholtz shift beta must be non-negative");
  }
  ScalarField out(f.spec());
  detail::apply_helmholtz_raw(f.spec(), beta, chi, f.values(), out.values());
  return out;
}

}  // namespace blobrd
