#pragma once

// Restarted flexible GMRES (right preconditioned, modified Gram-Schmidt with
// selective reorthogonalization).
//
// Works on any vector type V that provides, via ADL:
//   double dot(const V&, const V&);
//   void axpy(double a, const V& x, V& y);   // y += a x
//   void scale(V& x, double a);
//   V zeros_like(const V&);
// The preconditioner may change from one application to the next; the
// preconditioned directions z_j are stored alongside the Krylov basis.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "blobrd/error.hpp"

namespace blobrd
{

template <typename V>
concept KrylovVector = std::copy_constructible<V> && requires(V &y, const V &x, double a) {
  { dot(x, x) } -> std::convertible_to<double>;
  axpy(a, x, y);
  scale(y, a);
  { zeros_like(x) } -> std::convertible_to<V>;
};

struct ConvergenceEntry
{
  std::int64_t cycles;
  double relative_residual;
};

struct ConvergenceHistory
{
  std::vector<ConvergenceEntry> entries;

  void record(std::int64_t cycles, double rel) { entries.push_back({cycles, rel}); }
  bool empty() const { return entries.empty(); }
  const ConvergenceEntry &back() const { return entries.back(); }

  /// Shift cycle counts by `offset` and append to this history.
  void append(const ConvergenceHistory &o, std::int64_t offset = 0)
  {
    for (const auto &e : o.entries)
    {
      entries.push_back({e.cycles + offset, e.relative_residual});
    }
  }

  void write_csv(std::ostream &os) const
  {
    os << "cycles,relative_residual\n";
    char buf[64];
    for (const auto &e : entries)
    {
      std::snprintf(buf, sizeof(buf), "%lld,%.17e\n", static_cast<long long>(e.cycles),
                    e.relative_residual);
      os << buf;
    }
  }
};

struct KrylovConfig
{
  int restart = 30;
  int max_iterations = 10000;
  double rtol = 1e-9;
  /// Cost probe recorded in the history (e.g. cumulative V cycles). When
  /// unset the iteration count is recorded instead.
  std::function<std::int64_t()> work;
  /// Stop once work() exceeds this budget; <= 0 disables the check.
  std::int64_t work_budget = 0;
  /// Absolute floor used for the breakdown test, relative to ||rhs||.
  double breakdown_tol = 1e-14;
  /// Recompute b - op(x) before returning. Disable for fixed-count inner
  /// solves where an extra operator application would be wasted work.
  bool verify_residual = true;
  /// Measure max |<v_i, v_j> - delta_ij| over each restart window.
  bool check_orthogonality = false;

  void validate() const
  {
    if (restart < 1)
    {
      throw ConfigError("Krylov restart must be at least 1");
    }
    if (!(rtol > 0.0 && rtol < 1.0))
    {
      throw ConfigError("Krylov rtol must lie in (0, 1)");
    }
  }
};

template <typename V>
struct KrylovResult
{
  V x;
  ConvergenceHistory history;
  bool converged = false;
  bool breakdown = false;
  int iterations = 0;
  double relative_residual = 1.0;  // true residual at return
  double orthogonality_error = 0.0;  // filled when check_orthogonality is set
};

namespace detail
{

inline void plane_rotation(double a, double b, double &c, double &s)
{
  if (b == 0.0)
  {
    c = 1.0;
    s = 0.0;
    return;
  }
  const double r = std::hypot(a, b);
  c = a / r;
  s = b / r;
}

}  // namespace detail

/// Solves op(x) = rhs. `op` and `prec` are callables V -> V.
template <KrylovVector V, typename Op, typename Prec>
KrylovResult<V> fgmres(Op &&op, const V &rhs, Prec &&prec, const KrylovConfig &cfg,
                       const V *x0 = nullptr)
{
  cfg.validate();
  const auto work_base = cfg.work ? cfg.work() : std::int64_t{0};
  auto work_now = [&](int it) -> std::int64_t {
    return cfg.work ? cfg.work() - work_base : static_cast<std::int64_t>(it);
  };

  KrylovResult<V> res{x0 ? *x0 : zeros_like(rhs), {}};
  const double bnorm = std::sqrt(dot(rhs, rhs));
  if (bnorm == 0.0)
  {
    res.x = zeros_like(rhs);
    res.converged = true;
    res.relative_residual = 0.0;
    res.history.record(0, 0.0);
    return res;
  }

  auto true_residual = [&](const V &x) {
    V r = rhs;
    axpy(-1.0, op(x), r);
    return r;
  };

  V r = x0 ? true_residual(res.x) : rhs;
  double beta = std::sqrt(dot(r, r));
  res.relative_residual = beta / bnorm;
  res.history.record(work_now(0), res.relative_residual);
  if (res.relative_residual <= cfg.rtol)
  {
    res.converged = true;
    return res;
  }

  const int m = cfg.restart;
  std::vector<V> basis;
  std::vector<V> zdirs;
  basis.reserve(m + 1);
  zdirs.reserve(m);
  std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
  std::vector<double> cs(m), sn(m), g(m + 1);

  int it = 0;
  bool stop = false;
  while (!stop)
  {
    basis.clear();
    zdirs.clear();
    basis.push_back(r);
    scale(basis.back(), 1.0 / beta);
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int j = 0;
    bool happy = false;
    for (; j < m; ++j)
    {
      zdirs.push_back(prec(basis[j]));
      V w = op(zdirs[j]);
      const double wn = std::sqrt(dot(w, w));
      for (int i = 0; i <= j; ++i)
      {
        H[i][j] = dot(w, basis[i]);
        axpy(-H[i][j], basis[i], w);
      }
      double hn = std::sqrt(dot(w, w));
      // second Gram-Schmidt sweep when cancellation was severe
      if (hn < 0.7 * wn)
      {
        for (int i = 0; i <= j; ++i)
        {
          const double c = dot(w, basis[i]);
          H[i][j] += c;
          axpy(-c, basis[i], w);
        }
        hn = std::sqrt(dot(w, w));
      }
      H[j + 1][j] = hn;
      for (int i = 0; i < j; ++i)
      {
        const double t = cs[i] * H[i][j] + sn[i] * H[i + 1][j];
        H[i + 1][j] = -sn[i] * H[i][j] + cs[i] * H[i + 1][j];
        H[i][j] = t;
      }
      detail::plane_rotation(H[j][j], H[j + 1][j], cs[j], sn[j]);
      H[j][j] = cs[j] * H[j][j] + sn[j] * H[j + 1][j];
      H[j + 1][j] = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++it;

      const double est = std::abs(g[j + 1]) / bnorm;
      res.history.record(work_now(it), est);

      if (hn <= cfg.breakdown_tol * bnorm)
      {
        happy = true;
        ++j;
        break;
      }
      basis.push_back(std::move(w));
      scale(basis.back(), 1.0 / hn);

      const bool over_budget = cfg.work_budget > 0 && work_now(it) >= cfg.work_budget;
      if (est <= cfg.rtol || it >= cfg.max_iterations || over_budget)
      {
        ++j;
        break;
      }
    }

    if (cfg.check_orthogonality)
    {
      for (std::size_t a = 0; a < basis.size(); ++a)
      {
        for (std::size_t b = 0; b <= a; ++b)
        {
          const double e = std::abs(dot(basis[a], basis[b]) - (a == b ? 1.0 : 0.0));
          res.orthogonality_error = std::max(res.orthogonality_error, e);
        }
      }
    }

    // Back substitution on the triangularized Hessenberg system.
    std::vector<double> y(j, 0.0);
    for (int i = j - 1; i >= 0; --i)
    {
      double s = g[i];
      for (int k = i + 1; k < j; ++k)
      {
        s -= H[i][k] * y[k];
      }
      y[i] = H[i][i] != 0.0 ? s / H[i][i] : 0.0;
    }
    for (int i = 0; i < j; ++i)
    {
      axpy(y[i], zdirs[i], res.x);
    }

    res.iterations = it;
    const bool over_budget = cfg.work_budget > 0 && work_now(it) >= cfg.work_budget;
    const double est = std::abs(g[j]) / bnorm;
    if (!cfg.verify_residual && (happy || est <= cfg.rtol || it >= cfg.max_iterations || over_budget))
    {
      res.relative_residual = est;
      res.converged = est <= cfg.rtol;
      break;
    }
    r = true_residual(res.x);
    beta = std::sqrt(dot(r, r));
    res.relative_residual = beta / bnorm;

    if (res.relative_residual <= cfg.rtol)
    {
      res.converged = true;
      stop = true;
    }
    else if (happy)
    {
      // Invariant subspace found but the true residual disagrees.
      res.breakdown = true;
      stop = true;
    }
    else if (it >= cfg.max_iterations || over_budget)
    {
      stop = true;
    }
  }
  return res;
}

/// Unpreconditioned GMRES.
template <KrylovVector V, typename Op>
KrylovResult<V> gmres(Op &&op, const V &rhs, const KrylovConfig &cfg, const V *x0 = nullptr)
{
  return fgmres(std::forward<Op>(op), rhs, [](const V &v) { return v; }, cfg, x0);
}

}  // namespace blobrd
