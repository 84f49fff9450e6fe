#pragma once

// Cell-centered geometric multigrid for (beta I - chi L) u = g with
// homogeneous boundary data.
//
// Smoother: red-black Gauss-Seidel. Restriction: average of the 2^d children.
// Prolongation: bi/trilinear (3/4, 1/4 weights per axis). The coarsest level
// is solved with a dense LU factorization when it is small enough, otherwise
// with a fixed number of smoothing sweeps. For periodic grids with beta = 0
// the operator is singular and the hierarchy works on zero-mean fields.

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "blobrd/error.hpp"
#include "blobrd/grid.hpp"

namespace blobrd
{

/// Process-wide count of V cycles; the cost unit for convergence histories.
inline std::atomic<std::int64_t> &vcycle_counter()
{
  static std::atomic<std::int64_t> counter{0};
  return counter;
}

struct MultigridOptions
{
  int pre_sweeps = 2;
  int post_sweeps = 2;
  int coarse_sweeps = 50;
  std::size_t dense_coarse_limit = 1728;  // cells
};

class MultigridHierarchy
{
public:
  MultigridHierarchy(const GridSpec &fine, double beta, double chi, MultigridOptions opts = {})
    : beta_(beta), chi_(chi), opts_(opts)
  {
    if (beta < 0.0)
    {
      throw ConfigError("multigrid shift beta must be non-negative");
    }
    if (!(chi > 0.0))
    {
      throw ConfigError("diffusivity chi must be positive");
    }
    GridSpec g = fine.homogeneous();
    levels_.emplace_back(g);
    while (g.can_coarsen())
    {
      g = g.coarsened();
      levels_.emplace_back(g);
    }
    setup_coarse();
  }

  double beta() const { return beta_; }
  double chi() const { return chi_; }
  const GridSpec &fine_grid() const { return levels_.front().spec; }
  std::size_t level_count() const { return levels_.size(); }
  const GridSpec &level_grid(std::size_t l) const { return levels_[l].spec; }
  bool singular() const { return beta_ == 0.0 && fine_grid().periodic(); }
  std::int64_t cycles() const { return cycles_; }

  /// r = g - A u on the fine grid (homogeneous operator).
  ScalarField residual(const ScalarField &g, const ScalarField &u) const
  {
    check_shape(g);
    ScalarField r(g.spec());
    detail::apply_helmholtz_raw(fine_grid(), beta_, chi_, u.values(), r.values());
    for (std::size_t i = 0; i < r.size(); ++i)
    {
      r[i] = g[i] - r[i];
    }
    return r;
  }

  ScalarField apply(const ScalarField &u) const
  {
    ScalarField out(u.spec());
    detail::apply_helmholtz_raw(fine_grid(), beta_, chi_, u.values(), out.values());
    return out;
  }

  /// One V cycle starting from c0.
  ScalarField v_cycle(const ScalarField &g, const ScalarField &c0)
  {
    check_shape(g);
    check_shape(c0);
    if (singular())
    {
      const double m = mean(g);
      if (std::abs(m) > 1e-10 * std::max(g.max_abs(), 1e-300))
      {
        throw SolvabilityError("singular periodic problem needs a zero-mean right-hand side");
      }
    }
    Level &top = levels_.front();
    std::copy(g.values().begin(), g.values().end(), top.f.begin());
    std::copy(c0.values().begin(), c0.values().end(), top.u.begin());
    cycle(0);
    ScalarField out(g.spec(), top.u);
    return out;
  }

  /// n V cycles from a zero initial guess: the approximate inverse A_n^-1.
  /// Singular problems use the restricted inverse (zero-mean in and out).
  ScalarField solve_approx(const ScalarField &g, int n)
  {
    return solve_approx(g, n, ScalarField(g.spec()));
  }

  ScalarField solve_approx(const ScalarField &g, int n, const ScalarField &initial)
  {
    if (n < 1)
    {
      throw ConfigError("at least one V cycle is required");
    }
    check_shape(g);
    check_shape(initial);
    Level &top = levels_.front();
    std::copy(g.values().begin(), g.values().end(), top.f.begin());
    std::copy(initial.values().begin(), initial.values().end(), top.u.begin());
    if (singular())
    {
      remove_mean(top.f);
    }
    for (int c = 0; c < n; ++c)
    {
      cycle(0);
    }
    if (singular())
    {
      remove_mean(top.u);
    }
    return ScalarField(g.spec(), top.u);
  }

  /// V cycles until ||g - A u|| <= rtol ||g|| or max_cycles is reached.
  ScalarField solve(const ScalarField &g, double rtol, int max_cycles, int *used = nullptr)
  {
    check_shape(g);
    ScalarField rhs = singular() ? subtract_mean(g) : g;
    const double bnorm = norm(rhs);
    ScalarField u(g.spec());
    int k = 0;
    if (bnorm > 0.0)
    {
      while (k < max_cycles)
      {
        u = solve_approx(rhs, 1, u);
        ++k;
        if (norm(residual(rhs, u)) <= rtol * bnorm)
        {
          break;
        }
      }
    }
    if (used)
    {
      *used = k;
    }
    return u;
  }

private:
  struct Level
  {
    explicit Level(const GridSpec &g)
      : spec(g), u(g.cell_count(), 0.0), f(g.cell_count(), 0.0), r(g.cell_count(), 0.0)
    {
    }
    GridSpec spec;
    std::vector<double> u, f, r;
  };

  void check_shape(const ScalarField &f) const
  {
    if (!f.spec().same_shape(fine_grid()))
    {
      throw ConfigError("field grid does not match the multigrid hierarchy");
    }
  }

  static void remove_mean(std::vector<double> &v)
  {
    double s = 0.0;
    for (double x : v)
    {
      s += x;
    }
    s /= static_cast<double>(v.size());
    for (double &x : v)
    {
      x -= s;
    }
  }

  void setup_coarse()
  {
    const GridSpec &g = levels_.back().spec;
    const std::size_t n = g.cell_count();
    if (n > opts_.dense_coarse_limit)
    {
      return;
    }
    Eigen::MatrixXd A(n, n);
    std::vector<double> e(n, 0.0), col(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
    {
      e[j] = 1.0;
      detail::apply_helmholtz_raw(g, beta_, chi_, e, col);
      for (std::size_t i = 0; i < n; ++i)
      {
        A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
      }
      e[j] = 0.0;
    }
    if (beta_ == 0.0 && g.periodic())
    {
      // A + sigma/N 1 1^T maps zero-mean inputs to the zero-mean solution.
      const double sigma = chi_ * 2.0 * g.dim() / (g.spacing() * g.spacing());
      A.array() += sigma / static_cast<double>(n);
    }
    coarse_lu_ = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXd>>(A);
  }

  void smooth(std::size_t l, int sweeps)
  {
    Level &lev = levels_[l];
    const GridSpec &g = lev.spec;
    const int nx = g.cells(0), ny = g.cells(1), nz = g.cells(2);
    const bool per = g.periodic();
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    const double off = chi_ * inv_h2;
    const double diag = beta_ + chi_ * 2.0 * g.dim() * inv_h2;
    const bool three = g.dim() == 3;
    const std::size_t sy = nx, sz = static_cast<std::size_t>(nx) * ny;
    double *u = lev.u.data();
    const double *f = lev.f.data();

    for (int s = 0; s < sweeps; ++s)
    {
      for (int color = 0; color < 2; ++color)
      {
        for (int k = 0; k < nz; ++k)
        {
          const int km = k > 0 ? k - 1 : (per ? nz - 1 : -1);
          const int kp = k < nz - 1 ? k + 1 : (per ? 0 : -1);
          for (int j = 0; j < ny; ++j)
          {
            const int jm = j > 0 ? j - 1 : (per ? ny - 1 : -1);
            const int jp = j < ny - 1 ? j + 1 : (per ? 0 : -1);
            const std::size_t row = sy * j + sz * k;
            const bool interior_row = jm >= 0 && jp >= 0 && (!three || (km >= 0 && kp >= 0));
            const int start = (color + j + k) & 1;
            // Fast path: cells away from x-boundaries in a row with valid y/z neighbors.
            for (int i = start; i < nx; i += 2)
            {
              const std::size_t c = row + i;
              double nb = 0.0;
              double dg = diag;
              const int im = i > 0 ? i - 1 : (per ? nx - 1 : -1);
              const int ip = i < nx - 1 ? i + 1 : (per ? 0 : -1);
              if (interior_row && im >= 0 && ip >= 0)
              {
                nb = u[row + im] + u[row + ip] + u[sy * jm + sz * k + i] + u[sy * jp + sz * k + i];
                if (three)
                {
                  nb += u[sy * j + sz * km + i] + u[sy * j + sz * kp + i];
                }
              }
              else
              {
                // homogeneous Dirichlet ghost = -u_c moves onto the diagonal
                auto add = [&](int idx, std::size_t pos) {
                  if (idx >= 0)
                  {
                    nb += u[pos];
                  }
                  else
                  {
                    dg += off;
                  }
                };
                add(im, row + (im >= 0 ? im : 0));
                add(ip, row + (ip >= 0 ? ip : 0));
                add(jm, sy * (jm >= 0 ? jm : 0) + sz * k + i);
                add(jp, sy * (jp >= 0 ? jp : 0) + sz * k + i);
                if (three)
                {
                  add(km, sy * j + sz * (km >= 0 ? km : 0) + i);
                  add(kp, sy * j + sz * (kp >= 0 ? kp : 0) + i);
                }
              }
              u[c] = (f[c] + off * nb) / dg;
            }
          }
        }
      }
    }
  }

  void compute_residual(std::size_t l)
  {
    Level &lev = levels_[l];
    detail::apply_helmholtz_raw(lev.spec, beta_, chi_, lev.u, lev.r);
    for (std::size_t i = 0; i < lev.r.size(); ++i)
    {
      lev.r[i] = lev.f[i] - lev.r[i];
    }
  }

  void restrict_residual(std::size_t l)
  {
    const Level &fine = levels_[l];
    Level &coarse = levels_[l + 1];
    const GridSpec &cg = coarse.spec;
    const GridSpec &fg = fine.spec;
    const int three = cg.dim() == 3 ? 1 : 0;
    const double w = three ? 0.125 : 0.25;
    for (int K = 0; K < cg.cells(2); ++K)
    {
      for (int J = 0; J < cg.cells(1); ++J)
      {
        for (int I = 0; I < cg.cells(0); ++I)
        {
          double s = 0.0;
          for (int dk = 0; dk <= three; ++dk)
          {
            for (int dj = 0; dj < 2; ++dj)
            {
              const std::size_t base = fg.index(2 * I, 2 * J + dj, three ? 2 * K + dk : 0);
              s += fine.r[base] + fine.r[base + 1];
            }
          }
          coarse.f[cg.index(I, J, K)] = w * s;
        }
      }
    }
  }

  void prolong_add(std::size_t l)
  {
    Level &fine = levels_[l];
    const Level &coarse = levels_[l + 1];
    const GridSpec &cg = coarse.spec;
    const GridSpec &fg = fine.spec;
    const bool per = cg.periodic();
    const bool three = cg.dim() == 3;

    // Per-axis (coarse index, neighbor index, neighbor sign) for each fine index.
    struct Tap
    {
      int near, far;
      double far_sign;  // -1 for a homogeneous Dirichlet ghost
    };
    auto taps = [&](int nf, int nc) {
      std::vector<Tap> t(nf);
      for (int i = 0; i < nf; ++i)
      {
        const int I = i / 2;
        int F = (i % 2 == 0) ? I - 1 : I + 1;
        double sgn = 1.0;
        if (F < 0 || F >= nc)
        {
          if (per)
          {
            F = (F + nc) % nc;
          }
          else
          {
            F = I;
            sgn = -1.0;
          }
        }
        t[i] = {I, F, sgn};
      }
      return t;
    };
    const auto tx = taps(fg.cells(0), cg.cells(0));
    const auto ty = taps(fg.cells(1), cg.cells(1));
    const auto tz = taps(fg.cells(2), cg.cells(2));
    const double *uc = coarse.u.data();
    const std::size_t csy = cg.cells(0), csz = static_cast<std::size_t>(cg.cells(0)) * cg.cells(1);

    for (int k = 0; k < fg.cells(2); ++k)
    {
      for (int j = 0; j < fg.cells(1); ++j)
      {
        const std::size_t frow = fg.index(0, j, k);
        const Tap &ay = ty[j];
        for (int i = 0; i < fg.cells(0); ++i)
        {
          const Tap &ax = tx[i];
          auto plane = [&](std::size_t zoff) {
            const double a = uc[zoff + csy * ay.near + ax.near];
            const double b = ax.far_sign * uc[zoff + csy * ay.near + ax.far];
            const double c = ay.far_sign * uc[zoff + csy * ay.far + ax.near];
            const double d = ax.far_sign * ay.far_sign * uc[zoff + csy * ay.far + ax.far];
            return 0.5625 * a + 0.1875 * (b + c) + 0.0625 * d;
          };
          double v;
          if (three)
          {
            const Tap &az = tz[k];
            v = 0.75 * plane(csz * az.near) + 0.25 * az.far_sign * plane(csz * az.far);
          }
          else
          {
            v = plane(0);
          }
          fine.u[frow + i] += v;
        }
      }
    }
  }

  void coarse_solve()
  {
    Level &lev = levels_.back();
    if (coarse_lu_)
    {
      Eigen::Map<const Eigen::VectorXd> f(lev.f.data(), static_cast<Eigen::Index>(lev.f.size()));
      Eigen::VectorXd x = coarse_lu_->solve(f);
      std::copy(x.data(), x.data() + x.size(), lev.u.begin());
    }
    else
    {
      smooth(levels_.size() - 1, opts_.coarse_sweeps);
    }
    if (singular())
    {
      remove_mean(lev.u);
    }
  }

  void cycle(std::size_t l)
  {
    if (l + 1 == levels_.size())
    {
      coarse_solve();
    }
    else
    {
      smooth(l, opts_.pre_sweeps);
      compute_residual(l);
      restrict_residual(l);
      Level &next = levels_[l + 1];
      std::fill(next.u.begin(), next.u.end(), 0.0);
      cycle(l + 1);
      prolong_add(l);
      smooth(l, opts_.post_sweeps);
    }
    if (l == 0)
    {
      ++cycles_;
      vcycle_counter().fetch_add(1, std::memory_order_relaxed);
    }
  }

  double beta_;
  double chi_;
  MultigridOptions opts_;
  std::vector<Level> levels_;
  std::unique_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> coarse_lu_;
  std::int64_t cycles_ = 0;
};

}  // namespace blobrd
