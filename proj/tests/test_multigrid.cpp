#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "blobrd/multigrid.hpp"
#include "oracles.hpp"

using namespace blobrd;

namespace
{

double contraction(MultigridHierarchy &mg, const ScalarField &g, int cycles)
{
  ScalarField u(g.spec());
  const double r0 = norm(mg.residual(g, u));
  for (int c = 0; c < cycles; ++c)
  {
    u = mg.v_cycle(g, u);
  }
  return std::pow(norm(mg.residual(g, u)) / r0, 1.0 / cycles);
}

}  // namespace

TEST(Multigrid, HierarchyHalvesDownToFourCells)
{
  MultigridHierarchy mg(GridSpec::cube(3, 64, 1.0), 0.0, 1.0);
  ASSERT_EQ(mg.level_count(), 5u);
  for (std::size_t l = 1; l < mg.level_count(); ++l)
  {
    EXPECT_EQ(mg.level_grid(l).cells(0) * 2, mg.level_grid(l - 1).cells(0));
  }
  EXPECT_EQ(mg.level_grid(4).cells(0), 4);
  EXPECT_THROW(MultigridHierarchy(GridSpec::cube(3, 8, 1.0), -1.0, 1.0), ConfigError);
  EXPECT_THROW(MultigridHierarchy(GridSpec::cube(3, 8, 1.0), 0.0, 0.0), ConfigError);
}

TEST(Multigrid, ZeroStaysZero)
{
  const GridSpec g = GridSpec::cube(3, 16, 1.0);
  MultigridHierarchy mg(g, 0.0, 1.0);
  EXPECT_EQ(mg.v_cycle(ScalarField(g), ScalarField(g)).max_abs(), 0.0);
}

TEST(Multigrid, ExactSolutionIsFixedPoint)
{
  const GridSpec g = GridSpec::cube(3, 16, 1.0);
  MultigridHierarchy mg(g, 0.0, 1.0);
  const ScalarField u = subtract_mean(oracle::random_field(g, 1));
  const ScalarField f = mg.apply(u);
  const ScalarField v = mg.v_cycle(f, u);
  EXPECT_LE(norm(mg.residual(f, v)), 1e-12 * norm(f));
}

TEST(Multigrid, PeriodicPoissonContraction)
{
  for (int n : {32, 64})
  {
    const GridSpec g = GridSpec::cube(3, n, 1.0);
    MultigridHierarchy mg(g, 0.0, 1.0);
    const ScalarField rhs = subtract_mean(oracle::random_field(g, 2));
    EXPECT_LE(contraction(mg, rhs, 1), 0.2) << n;
    EXPECT_LE(contraction(mg, rhs, 10), 0.2) << n;
  }
}

TEST(Multigrid, DirichletAndTwoDimensionalContraction)
{
  const GridSpec d3 = GridSpec::cube(3, 32, 1.0, Boundary::dirichlet(0.0));
  MultigridHierarchy m3(d3, 0.0, 1.0);
  EXPECT_LE(contraction(m3, oracle::random_field(d3, 3), 8), 0.2);

  const GridSpec p2 = GridSpec::cube(2, 64, 1.0);
  MultigridHierarchy m2(p2, 0.0, 1.0);
  EXPECT_LE(contraction(m2, subtract_mean(oracle::random_field(p2, 4)), 8), 0.2);
}

TEST(Multigrid, SolveReachesToleranceQuickly)
{
  const GridSpec g = GridSpec::cube(3, 32, 1.0);
  MultigridHierarchy mg(g, 0.0, 1.0);
  const ScalarField rhs = subtract_mean(oracle::random_field(g, 5));
  int used = 0;
  const ScalarField u = mg.solve(rhs, 1e-9, 100, &used);
  EXPECT_LE(used, 15);
  EXPECT_LE(norm(mg.residual(rhs, u)), 1e-9 * norm(rhs));
}

TEST(Multigrid, CyclesGrowAtMostLogarithmically)
{
  int prev = 0;
  for (int n : {16, 32, 64})
  {
    const GridSpec g = GridSpec::cube(3, n, 1.0);
    MultigridHierarchy mg(g, 0.0, 1.0);
    int used = 0;
    mg.solve(subtract_mean(oracle::random_field(g, 6)), 1e-9, 100, &used);
    if (prev)
    {
      EXPECT_LE(used, prev + 2);
    }
    prev = used;
  }
}

TEST(Multigrid, RestrictedInverseIsZeroMean)
{
  const GridSpec g = GridSpec::cube(3, 16, 1.0);
  MultigridHierarchy mg(g, 0.0, 1.0);
  ScalarField rhs = oracle::random_field(g, 7);
  rhs += 3.0;
  const ScalarField u = mg.solve_approx(rhs, 3);
  EXPECT_NEAR(mean(u), 0.0, 1e-13);
  EXPECT_THROW(mg.v_cycle(rhs, ScalarField(g)), SolvabilityError);
}

TEST(Multigrid, ShiftedOperatorNeedsNoProjection)
{
  const int n = 16;
  const GridSpec g = GridSpec::cube(3, n, 1.0);
  MultigridHierarchy mg(g, 1.0 / (n * n), 1.0);
  EXPECT_FALSE(mg.singular());
  ScalarField rhs = oracle::random_field(g, 8);
  rhs += 1.0;
  const ScalarField u = mg.solve(rhs, 1e-10, 60);
  EXPECT_LE(norm(mg.residual(rhs, u)), 1e-10 * norm(rhs));
  EXPECT_NEAR(mean(u), mean(rhs) * n * n, 1e-6 * std::abs(mean(rhs) * n * n));
}

TEST(Multigrid, SolveApproxIsLinear)
{
  const GridSpec g = GridSpec::cube(3, 16, 1.0);
  for (double beta : {0.0, 0.1})
  {
    MultigridHierarchy mg(g, beta, 1.0);
    const ScalarField a = subtract_mean(oracle::random_field(g, 9));
    const ScalarField b = subtract_mean(oracle::random_field(g, 10));
    ScalarField comb = b;
    axpy(2.5, a, comb);
    const ScalarField lhs = mg.solve_approx(comb, 2);
    ScalarField rhs = mg.solve_approx(b, 2);
    axpy(2.5, mg.solve_approx(a, 2), rhs);
    EXPECT_LE(norm(lhs - rhs), 1e-12 * norm(lhs));
  }
}

TEST(Multigrid, DenseCoarseSolveMatchesDirect)
{
  // 9^3 cannot coarsen: the whole solve is the dense LU
  const GridSpec g = GridSpec::cube(3, 9, 0.5);
  MultigridHierarchy mg(g, 0.3, 1.7);
  ASSERT_EQ(mg.level_count(), 1u);
  const ScalarField rhs = oracle::random_field(g, 11);
  const ScalarField u = mg.solve_approx(rhs, 1);
  const Eigen::MatrixXd A =
    0.3 * Eigen::MatrixXd::Identity(729, 729) - 1.7 * oracle::dense_laplacian(g);
  const Eigen::VectorXd ref = A.partialPivLu().solve(oracle::to_eigen(rhs));
  EXPECT_LE((oracle::to_eigen(u) - ref).cwiseAbs().maxCoeff(), 1e-10 * ref.cwiseAbs().maxCoeff());
}

TEST(Multigrid, DirichletSecondOrderAccuracy)
{
  // -L u = f on the unit cube with u = c_b + sin(pi x) sin(pi y) sin(pi z)
  const double cb = 0.5;
  double prev_err = 0.0;
  for (int n : {16, 32})
  {
    const GridSpec g = GridSpec::cube(3, n, 1.0 / n, Boundary::dirichlet(cb));
    const double pi = std::numbers::pi;
    auto shape = [&](const Vec3 &r) {
      return std::sin(pi * r[0]) * std::sin(pi * r[1]) * std::sin(pi * r[2]);
    };
    const ScalarField f =
      ScalarField::from_function(g, [&](const Vec3 &r) { return 3 * pi * pi * shape(r); });
    // lift: A(c_b + v) = f  ->  A0 v = f - A(c_b)
    ScalarField rhs = f;
    rhs -= apply_helmholtz(ScalarField(g, cb), 0.0, 1.0);
    MultigridHierarchy mg(g, 0.0, 1.0);
    ScalarField v = mg.solve(rhs, 1e-12, 80);
    v += cb;
    double err = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
    {
      err = std::max(err, std::abs(v[i] - cb - shape(g.center(g.unravel(i)))));
    }
    if (prev_err > 0.0)
    {
      EXPECT_GT(prev_err / err, 3.5);
    }
    prev_err = err;
  }
}

TEST(Multigrid, CounterTracksFineCycles)
{
  const GridSpec g = GridSpec::cube(3, 16, 1.0);
  MultigridHierarchy mg(g, 0.0, 1.0);
  const auto before = vcycle_counter().load();
  mg.solve_approx(subtract_mean(oracle::random_field(g, 12)), 4);
  EXPECT_EQ(vcycle_counter().load() - before, 4);
  EXPECT_EQ(mg.cycles(), 4);
}
