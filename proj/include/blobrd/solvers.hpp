#pragma once

// Reaction-diffusion linear systems on a grid with blobs.
//
//   finite rate:       (beta I - chi L + S kappa J) c = g
//   diffusion limited: [ A      zeta S ] [ c      ]   [ g ]
//                      [ xi J   0      ] [ lambda ] = [ f ],   A = beta I - chi L
//
// beta = 1/dt for a backward Euler step and 0 at steady state. Non-zero
// Dirichlet data is lifted out (c = c_b + u) so every Krylov solve works on
// the homogeneous linear operator. Periodic steady problems (beta = 0) have a
// singular A; the saddle preconditioner then follows the null-space handling
// with the restricted inverse and the solvability condition on <lambda>.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "blobrd/error.hpp"
#include "blobrd/grid.hpp"
#include "blobrd/kernels.hpp"
#include "blobrd/krylov.hpp"
#include "blobrd/multigrid.hpp"

namespace blobrd
{

// ---------------------------------------------------------------------------
// Product space (c, lambda)

struct SaddleVector
{
  ScalarField c;
  BlobVector lambda;
};

inline double dot(const SaddleVector &a, const SaddleVector &b)
{
  return dot(a.c, b.c) + dot(a.lambda, b.lambda);
}

inline void axpy(double alpha, const SaddleVector &x, SaddleVector &y)
{
  axpy(alpha, x.c, y.c);
  axpy(alpha, x.lambda, y.lambda);
}

inline void scale(SaddleVector &x, double alpha)
{
  scale(x.c, alpha);
  scale(x.lambda, alpha);
}

inline SaddleVector zeros_like(const SaddleVector &x)
{
  return {zeros_like(x.c), zeros_like(x.lambda)};
}

// ---------------------------------------------------------------------------
// System description

class ReactionSystem
{
public:
  /// `beta` is the Helmholtz shift (1/dt, or 0 at steady state).
  ReactionSystem(BlobSet blobs, double chi, double beta, std::optional<ScalarField> source = {})
    : blobs_(std::move(blobs)), chi_(chi), beta_(beta),
      source_(source ? std::move(*source) : ScalarField(blobs_.grid()))
  {
    if (!(chi > 0.0))
    {
      throw ConfigError("diffusivity chi must be positive");
    }
    if (beta < 0.0 || !std::isfinite(beta))
    {
      throw ConfigError("Helmholtz shift must be finite and non-negative");
    }
    if (!source_.spec().same_shape(grid()))
    {
      throw ConfigError("source field grid does not match the blob grid");
    }
    zeta_ = chi_ * grid().spacing();
    xi_ = zeta_ / grid().cell_volume();
  }

  static ReactionSystem steady(BlobSet blobs, double chi, std::optional<ScalarField> s = {})
  {
    return ReactionSystem(std::move(blobs), chi, 0.0, std::move(s));
  }

  static ReactionSystem unsteady(BlobSet blobs, double chi, double dt,
                                 std::optional<ScalarField> s = {})
  {
    if (!(dt > 0.0))
    {
      throw ConfigError("time step must be positive");
    }
    return ReactionSystem(std::move(blobs), chi, 1.0 / dt, std::move(s));
  }

  /// A = chi ((n h)^-2 I - L): the near-steady benchmark operator, which is
  /// L^-2 I - L for unit spacing and diffusivity on an n^d grid.
  static ReactionSystem test_operator(BlobSet blobs, double chi, std::optional<ScalarField> s = {})
  {
    const double len = blobs.grid().extent(0);
    return ReactionSystem(std::move(blobs), chi, chi / (len * len), std::move(s));
  }

  const GridSpec &grid() const { return blobs_.grid(); }
  const BlobSet &blobs() const { return blobs_; }
  double chi() const { return chi_; }
  double beta() const { return beta_; }
  const ScalarField &source() const { return source_; }
  double zeta() const { return zeta_; }
  double xi() const { return xi_; }
  /// Diffusive CFL number chi dt / h^2 (infinite at steady state).
  double cfl() const
  {
    const double h = grid().spacing();
    return beta_ > 0.0 ? chi_ / (beta_ * h * h) : std::numeric_limits<double>::infinity();
  }
  bool singular() const { return beta_ == 0.0 && grid().periodic(); }

  /// Set zeta; xi follows as zeta / dV_f.
  void set_zeta(double zeta)
  {
    if (!(zeta > 0.0))
    {
      throw ConfigError("scaling zeta must be positive");
    }
    zeta_ = zeta;
    xi_ = zeta / grid().cell_volume();
  }

  void set_source(ScalarField s)
  {
    if (!s.spec().same_shape(grid()))
    {
      throw ConfigError("source field grid does not match the blob grid");
    }
    source_ = std::move(s);
  }

  void set_blobs(BlobSet b)
  {
    if (!b.grid().same_shape(grid()))
    {
      throw ConfigError("blob grid does not match the system grid");
    }
    blobs_ = std::move(b);
  }

  /// Homogeneous A u = beta u - chi L0 u.
  ScalarField apply_a(const ScalarField &u) const
  {
    ScalarField out(u.spec());
    detail::apply_helmholtz_raw(grid().homogeneous(), beta_, chi_, u.values(), out.values());
    return out;
  }

  /// Constant field holding the Dirichlet value (zero for periodic grids).
  ScalarField lift() const
  {
    return ScalarField(grid(), grid().periodic() ? 0.0 : grid().boundary().value);
  }

private:
  BlobSet blobs_;
  double chi_;
  double beta_;
  ScalarField source_;
  double zeta_ = 1.0;
  double xi_ = 1.0;
};

enum class SaddlePrecond
{
  Diagonal,
  ApproxSchur
};

struct SolverOptions
{
  SaddlePrecond precond = SaddlePrecond::ApproxSchur;
  int m = 5;  // inner Schur iterations
  int n = 1;  // V cycles per approximate Helmholtz solve
  int restart = 30;
  double rtol = 1e-9;
  std::int64_t cycle_budget = 2000;
  int max_iterations = 100000;

  KrylovConfig krylov() const
  {
    KrylovConfig k;
    k.restart = restart;
    k.rtol = rtol;
    k.max_iterations = max_iterations;
    k.work = [] { return vcycle_counter().load(std::memory_order_relaxed); };
    k.work_budget = cycle_budget;
    return k;
  }
};

struct SolveStats
{
  ConvergenceHistory history;
  bool converged = false;
  bool breakdown = false;
  int iterations = 0;
  std::int64_t cycles = 0;
  double relative_residual = 1.0;
};

struct SaddleSolution
{
  ScalarField c;
  BlobVector lambda;  // physical sink strengths (amount / time)
  SolveStats stats;
};

struct ReactionSolution
{
  ScalarField c;
  SolveStats stats;
};

template <typename V>
SolveStats make_stats(const KrylovResult<V> &r)
{
  SolveStats s;
  s.history = r.history;
  s.converged = r.converged;
  s.breakdown = r.breakdown;
  s.iterations = r.iterations;
  s.cycles = r.history.empty() ? 0 : r.history.back().cycles;
  s.relative_residual = r.relative_residual;
  return s;
}

// ---------------------------------------------------------------------------
// Finite reaction rate

inline void require_finite_kappa(const BlobSet &blobs)
{
  if (blobs.diffusion_limited())
  {
    throw ConfigError("diffusion-limited blobs need the saddle-point solver");
  }
}

namespace detail
{

/// Homogeneous B u = beta u - chi L0 u + S kappa J u.
inline ScalarField apply_b(const ReactionSystem &sys, const ScalarField &u)
{
  ScalarField out = sys.apply_a(u);
  BlobVector ju = interpolate(sys.blobs(), u);
  for (std::size_t i = 0; i < ju.size(); ++i)
  {
    ju[i] *= sys.blobs().kappa()[i];
  }
  spread_add(sys.blobs(), ju, out);
  return out;
}

inline double total_kappa(const BlobSet &blobs)
{
  double s = 0.0;
  for (double k : blobs.kappa())
  {
    s += k;
  }
  return s;
}

}  // namespace detail

/// (beta I - chi L + S kappa J) c, including Dirichlet boundary data.
inline ScalarField apply_reaction_operator(const ReactionSystem &sys, const ScalarField &c)
{
  require_finite_kappa(sys.blobs());
  ScalarField out(c.spec());
  detail::apply_helmholtz_raw(sys.grid(), sys.beta(), sys.chi(), c.values(), out.values());
  BlobVector jc = interpolate(sys.blobs(), c);
  for (std::size_t i = 0; i < jc.size(); ++i)
  {
    jc[i] *= sys.blobs().kappa()[i];
  }
  spread_add(sys.blobs(), jc, out);
  return out;
}

/// Solves B c = g with FGMRES preconditioned by n V cycles of the Helmholtz
/// multigrid. `guess` is the full (non-lifted) initial iterate.
inline ReactionSolution solve_reaction(const ReactionSystem &sys, const ScalarField &g,
                                       const SolverOptions &opts,
                                       const ScalarField *guess = nullptr)
{
  require_finite_kappa(sys.blobs());
  const bool singular = sys.singular();
  const double ktot = detail::total_kappa(sys.blobs());
  if (singular && ktot == 0.0)
  {
    const double m = mean(g);
    if (std::abs(m) > 1e-10 * std::max(g.max_abs(), 1e-300))
    {
      throw SolvabilityError("no reaction and periodic steady state: source must have zero mean");
    }
  }

  const ScalarField lift = sys.lift();
  ScalarField rhs = g;
  rhs -= apply_reaction_operator(sys, lift);

  MultigridHierarchy mg(sys.grid(), sys.beta(), sys.chi());
  const double vol = sys.grid().domain_volume();
  auto op = [&](const ScalarField &u) { return detail::apply_b(sys, u); };
  auto prec = [&](const ScalarField &r) {
    ScalarField z = mg.solve_approx(r, opts.n);
    if (singular && ktot > 0.0)
    {
      // restricted inverse drops the mean; recover it from the reaction term
      z += vol * mean(r) / ktot;
    }
    return z;
  };

  std::optional<ScalarField> x0;
  if (guess)
  {
    x0 = *guess;
    *x0 -= lift;
  }
  auto kr = fgmres(op, rhs, prec, opts.krylov(), x0 ? &*x0 : nullptr);
  ReactionSolution out{kr.x, make_stats(kr)};
  out.c += lift;
  return out;
}

/// Steady state (S kappa J - chi L) c = s.
inline ReactionSolution solve_steady_finite_kappa(const ReactionSystem &sys,
                                                  const SolverOptions &opts = {})
{
  if (sys.beta() != 0.0)
  {
    throw ConfigError("steady solve needs a system with beta = 0");
  }
  return solve_reaction(sys, sys.source(), opts);
}

/// One backward Euler step: (dt^-1 I - chi L + S kappa J) c^{n+1} = dt^-1 c^n + s.
inline ReactionSolution step_backward_euler(const ReactionSystem &sys, const ScalarField &c_n,
                                            const SolverOptions &opts = {})
{
  if (!(sys.beta() > 0.0))
  {
    throw ConfigError("backward Euler needs a finite time step");
  }
  ScalarField g = c_n;
  g *= sys.beta();
  g += sys.source();
  return solve_reaction(sys, g, opts, &c_n);
}

// ---------------------------------------------------------------------------
// Diffusion-limited saddle point

/// Single-blob Schur diagonal chi * J A^-1 S 1 for A = beta I - chi L; with
/// the defaults this is -(J L^+ S) 1 for the periodic Poisson problem.
inline double compute_gamma(const GridSpec &grid, KernelKind kernel, const Vec3 &q,
                            double beta = 0.0, double chi = 1.0)
{
  BlobSet one(grid.homogeneous(), kernel, {q});
  ScalarField s1 = spread(one, BlobVector(1, 1.0));
  MultigridHierarchy mg(grid, beta, chi);
  ScalarField x = mg.solve(s1, 1e-13, 200);
  return chi * interpolate(one, x)[0];
}

/// Saddle operator on the homogeneous problem: (A c + zeta S lambda, xi J c).
inline SaddleVector apply_saddle(const ReactionSystem &sys, const SaddleVector &x)
{
  SaddleVector out{sys.apply_a(x.c), interpolate(sys.blobs(), x.c)};
  BlobVector zl = x.lambda;
  scale(zl, sys.zeta());
  spread_add(sys.blobs(), zl, out.c);
  scale(out.lambda, sys.xi());
  return out;
}

/// Approximate solver for the saddle system (diagonal or approximate-Schur).
class SaddlePreconditioner
{
public:
  SaddlePreconditioner(const ReactionSystem &sys, SaddlePrecond kind, int m, int n)
    : sys_(sys), kind_(kind), m_(m), n_(n), mg_(sys.grid(), sys.beta(), sys.chi())
  {
    if (m < 1 || n < 1)
    {
      throw ConfigError("preconditioner parameters m and n must be at least 1");
    }
    if (kind == SaddlePrecond::Diagonal && sys.blobs().size() > 0)
    {
      gamma_a_ = compute_gamma(sys.grid(), sys.blobs().kernel(), sys.blobs().positions()[0],
                               sys.beta(), sys.chi()) /
                 sys.chi();
    }
  }

  double gamma() const { return gamma_a_ * sys_.chi(); }

  SaddleVector operator()(const SaddleVector &r)
  {
    const BlobSet &blobs = sys_.blobs();
    const std::size_t nb = blobs.size();
    const bool alpha = sys_.singular();
    const double zeta = sys_.zeta(), xi = sys_.xi();
    const double vol = sys_.grid().domain_volume();

    // 1. concentration estimate with the mean of g carried by the blobs
    ScalarField gt = r.c;
    const double gmean = alpha ? mean(r.c) : 0.0;
    if (alpha && nb > 0)
    {
      ScalarField sg(sys_.grid());
      spread_add(blobs, BlobVector(nb, gmean * vol / static_cast<double>(nb)), sg);
      gt -= sg;
    }
    ScalarField cstar = mg_.solve_approx(gt, n_);

    // 2. Lagrange multipliers from the (approximate) Schur complement
    BlobVector ht = interpolate(blobs, cstar);
    scale(ht, xi);
    axpy(-1.0, r.lambda, ht);
    BlobVector lt(nb);
    if (kind_ == SaddlePrecond::Diagonal)
    {
      lt = ht;
      scale(lt, 1.0 / (zeta * xi * gamma_a_));
    }
    else if (nb > 0)
    {
      BlobVector rhs = ht;
      scale(rhs, 1.0 / (zeta * xi));
      KrylovConfig inner;
      inner.restart = m_;
      inner.max_iterations = m_;
      inner.rtol = 1e-14;
      inner.verify_residual = false;
      auto schur = [&](const BlobVector &l) {
        return interpolate(blobs, mg_.solve_approx(spread(blobs, l), 1));
      };
      lt = gmres(schur, rhs, inner).x;
    }
    if (alpha)
    {
      const double lm = lt.mean();
      for (auto &v : lt.v)
      {
        v -= lm;
      }
    }

    // 3. corrected concentration, warm started from c*
    BlobVector zl = lt;
    scale(zl, zeta);
    ScalarField rhs_c = gt;
    ScalarField sl = spread(blobs, zl);
    rhs_c -= sl;
    ScalarField ct = mg_.solve_approx(rhs_c, n_, cstar);

    // 4-5. restore the null-space components
    if (alpha && nb > 0)
    {
      BlobVector jc = interpolate(blobs, ct);
      double cbar = 0.0;
      for (std::size_t i = 0; i < nb; ++i)
      {
        cbar += r.lambda[i] / xi - jc[i];
      }
      cbar /= static_cast<double>(nb);
      ct += cbar;
      const double lshift = vol * gmean / (zeta * static_cast<double>(nb));
      for (auto &v : lt.v)
      {
        v += lshift;
      }
    }
    return {std::move(ct), std::move(lt)};
  }

private:
  const ReactionSystem &sys_;
  SaddlePrecond kind_;
  int m_;
  int n_;
  MultigridHierarchy mg_;
  double gamma_a_ = 1.0;
};

/// Solves the diffusion-limited system for (c, lambda). `g` and `f` are the
/// full right-hand sides (c in the first row, xi J c = f in the second).
inline SaddleSolution solve_saddle(const ReactionSystem &sys, const ScalarField &g,
                                   const BlobVector &f, const SolverOptions &opts = {})
{
  const BlobSet &blobs = sys.blobs();
  if (f.size() != blobs.size())
  {
    throw ConfigError("constraint right-hand side needs one entry per blob");
  }
  if (sys.singular() && blobs.size() == 0)
  {
    throw SolvabilityError("singular saddle problem without blobs");
  }

  const ScalarField lift = sys.lift();
  SaddleVector rhs{g, f};
  if (!sys.grid().periodic())
  {
    ScalarField a_lift(sys.grid());
    detail::apply_helmholtz_raw(sys.grid(), sys.beta(), sys.chi(), lift.values(), a_lift.values());
    rhs.c -= a_lift;
    BlobVector jl = interpolate(blobs, lift);
    axpy(-sys.xi(), jl, rhs.lambda);
  }

  SaddlePreconditioner prec(sys, opts.precond, opts.m, opts.n);
  auto op = [&](const SaddleVector &x) { return apply_saddle(sys, x); };
  auto pfn = [&](const SaddleVector &x) { return prec(x); };
  auto kr = fgmres(op, rhs, pfn, opts.krylov());

  SaddleSolution sol{kr.x.c, kr.x.lambda, make_stats(kr)};
  sol.c += lift;
  scale(sol.lambda, sys.zeta());
  return sol;
}

/// Steady or unsteady saddle solve with g = source (plus dt^-1 c^n when
/// given) and f = 0.
inline SaddleSolution solve_saddle(const ReactionSystem &sys, const SolverOptions &opts = {})
{
  return solve_saddle(sys, sys.source(), BlobVector(sys.blobs().size()), opts);
}

}  // namespace blobrd
