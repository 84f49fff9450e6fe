#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "blobrd/grid.hpp"
#include "oracles.hpp"

using namespace blobrd;

TEST(GridSpec, RejectsInvalidShapes)
{
  EXPECT_THROW(GridSpec(1, {8, 8, 8}, 1.0), ConfigError);
  EXPECT_THROW(GridSpec(3, {8, 3, 8}, 1.0), ConfigError);
  EXPECT_THROW(GridSpec(3, {8, 8, 8}, 0.0), ConfigError);
  EXPECT_THROW(GridSpec(3, {8, 8, 8}, -1.0), ConfigError);
  EXPECT_NO_THROW(GridSpec(2, {8, 4, 0}, 0.5));
}

TEST(GridSpec, IndexLayoutIsXFastest)
{
  const GridSpec g(3, {5, 6, 7}, 0.25);
  EXPECT_EQ(g.index(1, 0, 0), 1u);
  EXPECT_EQ(g.index(0, 1, 0), 5u);
  EXPECT_EQ(g.index(0, 0, 1), 30u);
  for (std::size_t n = 0; n < g.cell_count(); ++n)
  {
    const auto ijk = g.unravel(n);
    EXPECT_EQ(g.index(ijk[0], ijk[1], ijk[2]), n);
  }
  const Vec3 r = g.center({2, 3, 4});
  EXPECT_DOUBLE_EQ(r[0], 2.5 * 0.25);
  EXPECT_DOUBLE_EQ(r[2], 4.5 * 0.25);
  EXPECT_DOUBLE_EQ(g.domain_volume(), 5 * 6 * 7 * std::pow(0.25, 3));
}

TEST(GridSpec, CoarseningHalvesAxes)
{
  GridSpec g = GridSpec::cube(3, 32, 1.0);
  int levels = 1;
  while (g.can_coarsen())
  {
    const GridSpec c = g.coarsened();
    EXPECT_EQ(c.cells(0) * 2, g.cells(0));
    EXPECT_DOUBLE_EQ(c.spacing(), 2.0 * g.spacing());
    g = c;
    ++levels;
  }
  EXPECT_EQ(g.cells(0), 4);
  EXPECT_EQ(levels, 4);
}

TEST(Laplacian, ConstantIsInNullSpace)
{
  const GridSpec g = GridSpec::cube(3, 8, 0.5);
  const ScalarField f(g, 5.0);
  EXPECT_LE(apply_laplacian(f).max_abs(), 1e-12);
}

TEST(Laplacian, SineIsEigenfield)
{
  for (int d : {2, 3})
  {
    const GridSpec g(d, {16, 8, 8}, 0.3);
    const double lx = g.extent(0), h = g.spacing();
    const auto f = ScalarField::from_function(
      g, [&](const Vec3 &r) { return std::sin(2 * std::numbers::pi * r[0] / lx); });
    const double lambda = -(2.0 - 2.0 * std::cos(2 * std::numbers::pi * h / lx)) / (h * h);
    const ScalarField lf = apply_laplacian(f);
    for (std::size_t i = 0; i < f.size(); ++i)
    {
      EXPECT_NEAR(lf[i], lambda * f[i], 1e-12 * std::abs(lambda));
    }
  }
}

TEST(Laplacian, ImpulseConservesSum)
{
  const GridSpec g = GridSpec::cube(3, 4, 1.0);
  ScalarField f(g);
  f.at(1, 2, 3) = 1.0;
  const ScalarField lf = apply_laplacian(f);
  double s = 0.0;
  for (std::size_t i = 0; i < lf.size(); ++i)
  {
    s += lf[i];
  }
  EXPECT_NEAR(s, 0.0, 1e-14);
  EXPECT_DOUBLE_EQ(lf.at(1, 2, 3), -6.0);
}

TEST(Laplacian, MatchesDenseAssembly)
{
  for (auto bc : {Boundary::periodic(), Boundary::dirichlet(0.7)})
  {
    for (int d : {2, 3})
    {
      const GridSpec g(d, {6, 4, 5}, 0.4, bc);
      Eigen::VectorXd b;
      const Eigen::MatrixXd L = oracle::dense_laplacian(g, &b);
      const ScalarField f = oracle::random_field(g, 3);
      Eigen::VectorXd expect = L * oracle::to_eigen(f);
      if (!g.periodic())
      {
        expect += bc.value * b;
      }
      const ScalarField lf = apply_laplacian(f);
      for (std::size_t i = 0; i < f.size(); ++i)
      {
        EXPECT_NEAR(lf[i], expect[static_cast<Eigen::Index>(i)], 1e-12 * expect.cwiseAbs().maxCoeff());
      }
    }
  }
}

TEST(Laplacian, PeriodicSymmetricNegativeSemidefinite)
{
  const GridSpec g = GridSpec::cube(3, 8, 1.0);
  for (unsigned s = 0; s < 5; ++s)
  {
    const ScalarField f = oracle::random_field(g, s), q = oracle::random_field(g, s + 100);
    const ScalarField lf = apply_laplacian(f), lq = apply_laplacian(q);
    const double a = dot(lf, q), b = dot(f, lq);
    EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
    EXPECT_LE(dot(f, lf), 1e-12 * norm(f) * norm(lf));
    EXPECT_NEAR(mean(lf), 0.0, 1e-13 * f.max_abs());
  }
}

TEST(Laplacian, DirichletConstantMatchingBoundaryIsHarmonic)
{
  const GridSpec g = GridSpec::cube(3, 8, 0.2, Boundary::dirichlet(2.5));
  const ScalarField f(g, 2.5);
  EXPECT_LE(apply_laplacian(f).max_abs(), 1e-12);
}

TEST(Helmholtz, Reductions)
{
  const GridSpec g = GridSpec::cube(3, 8, 1.0);
  const ScalarField f = oracle::random_field(g, 9);
  const ScalarField id = apply_helmholtz(f, 1.0, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i)
  {
    EXPECT_DOUBLE_EQ(id[i], f[i]);
  }
  const ScalarField a = apply_helmholtz(f, 0.0, 2.0);
  const ScalarField lf = apply_laplacian(f);
  for (std::size_t i = 0; i < f.size(); ++i)
  {
    EXPECT_NEAR(a[i], -2.0 * lf[i], 1e-12);
  }
  EXPECT_THROW(apply_helmholtz(f, -1.0, 1.0), ConfigError);
}

TEST(Helmholtz, TestOperatorOnUnitGrid)
{
  const int L = 8;
  const GridSpec g = GridSpec::cube(3, L, 1.0);
  const ScalarField f = oracle::random_field(g, 4);
  const ScalarField a = apply_helmholtz(f, 1.0 / (L * L), 1.0);
  const ScalarField lf = apply_laplacian(f);
  for (std::size_t i = 0; i < f.size(); ++i)
  {
    EXPECT_NEAR(a[i], f[i] / (L * L) - lf[i], 1e-13);
  }
}

TEST(Field, MeanDotAndProjection)
{
  const GridSpec g = GridSpec::cube(2, 8, 1.0);
  EXPECT_DOUBLE_EQ(mean(ScalarField(g, 3.25)), 3.25);
  const ScalarField f = oracle::random_field(g, 11);
  EXPECT_NEAR(mean(subtract_mean(f)), 0.0, 1e-14 * f.max_abs());
  EXPECT_GT(dot(f, f), 0.0);
  EXPECT_EQ(dot(ScalarField(g), ScalarField(g)), 0.0);
  EXPECT_TRUE(f.all_finite());
  EXPECT_THROW(ScalarField(g, std::vector<double>(3, 0.0)), ConfigError);
}

TEST(Field, VectorSpaceOperations)
{
  const GridSpec g = GridSpec::cube(3, 4, 1.0);
  ScalarField x = oracle::random_field(g, 1), y = oracle::random_field(g, 2);
  const ScalarField y0 = y;
  axpy(2.0, x, y);
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    EXPECT_DOUBLE_EQ(y[i], y0[i] + 2.0 * x[i]);
  }
  scale(x, 0.0);
  EXPECT_EQ(norm(x), 0.0);
  EXPECT_EQ(zeros_like(y).size(), y.size());
}
