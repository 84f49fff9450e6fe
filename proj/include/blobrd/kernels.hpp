#pragma once

// Peskin kernels and the blob averaging (J) / spreading (S) operators.
//
// Weights are tensor products of the 1-D dimensionless kernel evaluated at
// (q - r_k) / h. A blob touches exactly w cells per axis: for odd w the
// support is centered on the cell containing q, for even w on the nearest
// cell corner.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "blobrd/error.hpp"
#include "blobrd/grid.hpp"

namespace blobrd
{

enum class KernelKind
{
  ThreePoint = 3,
  FourPoint = 4
};

inline int support_width(KernelKind k) { return static_cast<int>(k); }

inline KernelKind kernel_from_width(int w)
{
  if (w == 3)
  {
    return KernelKind::ThreePoint;
  }
  if (w == 4)
  {
    return KernelKind::FourPoint;
  }
  throw ConfigError("kernel must be 3 or 4, got " + std::to_string(w));
}

/// 1-D dimensionless kernel phi_w(x), x = r / h.
inline double kernel_weight(KernelKind kind, double x)
{
  const double ax = std::abs(x);
  if (kind == KernelKind::FourPoint)
  {
    if (ax <= 1.0)
    {
      return 0.125 * (3.0 - 2.0 * ax + std::sqrt(1.0 + 4.0 * ax - 4.0 * x * x));
    }
    if (ax <= 2.0)
    {
      // clamp: the radicand is -(2|x|-3)^2 + 2 >= 0 analytically
      return 0.125 * (5.0 - 2.0 * ax - std::sqrt(std::max(0.0, -7.0 + 12.0 * ax - 4.0 * x * x)));
    }
    return 0.0;
  }
  if (ax <= 0.5)
  {
    return (1.0 + std::sqrt(1.0 - 3.0 * x * x)) / 3.0;
  }
  if (ax <= 1.5)
  {
    return (5.0 - 3.0 * ax - std::sqrt(std::max(0.0, -2.0 + 6.0 * ax - 3.0 * x * x))) / 6.0;
  }
  return 0.0;
}

/// Sum of phi^2 over the support along one axis; independent of position.
inline double kernel_square_sum(KernelKind kind)
{
  return kind == KernelKind::FourPoint ? 3.0 / 8.0 : 0.5;
}

/// Marker for an infinite reaction rate.
inline constexpr double kDiffusionLimited = std::numeric_limits<double>::infinity();

/// Per-blob vector (concentrations, sink strengths, ...).
struct BlobVector
{
  std::vector<double> v;

  BlobVector() = default;
  explicit BlobVector(std::size_t n, double fill = 0.0) : v(n, fill) {}
  explicit BlobVector(std::vector<double> values) : v(std::move(values)) {}

  std::size_t size() const { return v.size(); }
  double &operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }

  double mean() const
  {
    if (v.empty())
    {
      return 0.0;
    }
    double s = 0.0;
    for (double x : v)
    {
      s += x;
    }
    return s / static_cast<double>(v.size());
  }
};

inline double dot(const BlobVector &a, const BlobVector &b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    s += a[i] * b[i];
  }
  return s;
}

inline void axpy(double alpha, const BlobVector &x, BlobVector &y)
{
  for (std::size_t i = 0; i < y.size(); ++i)
  {
    y[i] += alpha * x[i];
  }
}

inline void scale(BlobVector &x, double alpha)
{
  for (auto &e : x.v)
  {
    e *= alpha;
  }
}

inline BlobVector zeros_like(const BlobVector &x) { return BlobVector(x.size()); }

/// Blob configuration on a grid. Positions are wrapped into the box for
/// periodic grids; for Dirichlet grids every support must lie inside.
class BlobSet
{
public:
  BlobSet(const GridSpec &grid, KernelKind kernel, std::vector<Vec3> positions,
          std::vector<double> kappa)
    : grid_(grid), kernel_(kernel), positions_(std::move(positions)), kappa_(std::move(kappa))
  {
    if (kappa_.size() != positions_.size())
    {
      throw ConfigError("one reaction rate per blob is required");
    }
    for (double k : kappa_)
    {
      if (std::isnan(k) || k < 0.0)
      {
        throw ConfigError("reaction rates must be non-negative");
      }
    }
    build_stencils();
  }

  /// All blobs share the same rate (kDiffusionLimited for the saddle path).
  BlobSet(const GridSpec &grid, KernelKind kernel, std::vector<Vec3> positions,
          double kappa = kDiffusionLimited)
    : BlobSet(grid, kernel, positions, std::vector<double>(positions.size(), kappa))
  {
  }

  const GridSpec &grid() const { return grid_; }
  KernelKind kernel() const { return kernel_; }
  std::size_t size() const { return positions_.size(); }
  const std::vector<Vec3> &positions() const { return positions_; }
  const std::vector<double> &kappa() const { return kappa_; }

  bool diffusion_limited() const
  {
    return std::any_of(kappa_.begin(), kappa_.end(), [](double k) { return std::isinf(k); });
  }

  /// Blob volume Delta V = (J_i S_i 1)^-1; position independent.
  double blob_volume() const
  {
    return std::pow(grid_.spacing(), grid_.dim()) /
           std::pow(kernel_square_sum(kernel_), grid_.dim());
  }

  /// Same geometry with new reaction rates.
  BlobSet with_kappa(std::vector<double> kappa) const
  {
    return BlobSet(grid_, kernel_, positions_, std::move(kappa));
  }

  // Flattened stencil: for blob b, cells/weights in [b * stride, (b+1) * stride).
  std::size_t stencil_size() const { return stride_; }
  std::span<const std::size_t> cells_of(std::size_t b) const
  {
    return {cells_.data() + b * stride_, stride_};
  }
  std::span<const double> weights_of(std::size_t b) const
  {
    return {weights_.data() + b * stride_, stride_};
  }

private:
  void build_stencils()
  {
    const int d = grid_.dim();
    const int w = support_width(kernel_);
    const double h = grid_.spacing();
    stride_ = 1;
    for (int a = 0; a < d; ++a)
    {
      stride_ *= static_cast<std::size_t>(w);
    }
    cells_.resize(stride_ * positions_.size());
    weights_.resize(stride_ * positions_.size());

    for (std::size_t b = 0; b < positions_.size(); ++b)
    {
      Vec3 &q = positions_[b];
      std::array<std::array<int, 4>, 3> idx{};
      std::array<std::array<double, 4>, 3> wt{};
      for (int a = 0; a < 3; ++a)
      {
        if (a >= d)
        {
          q[a] = 0.0;
          idx[a][0] = 0;
          wt[a][0] = 1.0;
          continue;
        }
        if (!std::isfinite(q[a]))
        {
          throw ConfigError("blob position must be finite");
        }
        const int n = grid_.cells(a);
        if (grid_.periodic())
        {
          const double L = n * h;
          q[a] = std::fmod(q[a], L);
          if (q[a] < 0.0)
          {
            q[a] += L;
          }
        }
        const double x = q[a] / h;
        const int first = static_cast<int>(std::floor(x - 0.5 - 0.5 * w)) + 1;
        for (int s = 0; s < w; ++s)
        {
          const int cell = first + s;
          wt[a][s] = kernel_weight(kernel_, x - (cell + 0.5));
          if (grid_.periodic())
          {
            idx[a][s] = ((cell % n) + n) % n;
          }
          else
          {
            if (cell < 0 || cell >= n)
            {
              throw ConfigError("blob " + std::to_string(b) +
                                " kernel support crosses the Dirichlet boundary");
            }
            idx[a][s] = cell;
          }
        }
      }
      const int wy = d >= 2 ? w : 1;
      const int wz = d == 3 ? w : 1;
      std::size_t o = b * stride_;
      for (int sz = 0; sz < wz; ++sz)
      {
        for (int sy = 0; sy < wy; ++sy)
        {
          for (int sx = 0; sx < w; ++sx)
          {
            cells_[o] = grid_.index(idx[0][sx], idx[1][sy], idx[2][sz]);
            weights_[o] = wt[0][sx] * wt[1][sy] * wt[2][sz];
            ++o;
          }
        }
      }
    }
  }

  GridSpec grid_;
  KernelKind kernel_;
  std::vector<Vec3> positions_;
  std::vector<double> kappa_;
  std::size_t stride_ = 0;
  std::vector<std::size_t> cells_;
  std::vector<double> weights_;
};

/// (J f)_i = sum_k phi(q_i - r_k) f_k.
inline BlobVector interpolate(const BlobSet &blobs, const ScalarField &f)
{
  BlobVector out(blobs.size());
  for (std::size_t b = 0; b < blobs.size(); ++b)
  {
    const auto cells = blobs.cells_of(b);
    const auto wts = blobs.weights_of(b);
    double s = 0.0;
    for (std::size_t m = 0; m < cells.size(); ++m)
    {
      s += wts[m] * f[cells[m]];
    }
    out[b] = s;
  }
  return out;
}

/// out += (S lambda), (S lambda)_k = dV_f^-1 sum_i phi(q_i - r_k) lambda_i.
inline void spread_add(const BlobSet &blobs, const BlobVector &strengths, ScalarField &out)
{
  const double inv_dv = 1.0 / blobs.grid().cell_volume();
  for (std::size_t b = 0; b < blobs.size(); ++b)
  {
    const auto cells = blobs.cells_of(b);
    const auto wts = blobs.weights_of(b);
    const double s = inv_dv * strengths[b];
    for (std::size_t m = 0; m < cells.size(); ++m)
    {
      out[cells[m]] += wts[m] * s;
    }
  }
}

inline ScalarField spread(const BlobSet &blobs, const BlobVector &strengths)
{
  ScalarField out(blobs.grid());
  spread_add(blobs, strengths, out);
  return out;
}

/// Delta V of blob i computed directly as (J_i S_i 1)^-1.
inline double blob_volume(const BlobSet &blobs, std::size_t i)
{
  const double inv_dv = 1.0 / blobs.grid().cell_volume();
  double js = 0.0;
  for (double w : blobs.weights_of(i))
  {
    js += w * w * inv_dv;
  }
  return 1.0 / js;
}

}  // namespace blobrd
