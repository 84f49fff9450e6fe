#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "blobrd/kernels.hpp"
#include "oracles.hpp"

using namespace blobrd;

namespace
{

const KernelKind kKinds[] = {KernelKind::ThreePoint, KernelKind::FourPoint};

}  // namespace

TEST(KernelWeight, ClosedFormValues)
{
  EXPECT_DOUBLE_EQ(kernel_weight(KernelKind::FourPoint, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(kernel_weight(KernelKind::ThreePoint, 0.0), 2.0 / 3.0);
  EXPECT_NEAR(kernel_weight(KernelKind::FourPoint, 2.0), 0.0, 1e-15);
  EXPECT_NEAR(kernel_weight(KernelKind::ThreePoint, 1.5), 0.0, 1e-15);
  EXPECT_EQ(kernel_weight(KernelKind::FourPoint, 2.5), 0.0);
  EXPECT_EQ(kernel_weight(KernelKind::ThreePoint, -1.6), 0.0);
  // 4-point at x = 1: both branches give 1/4
  EXPECT_NEAR(kernel_weight(KernelKind::FourPoint, 1.0), 0.25, 1e-15);
}

TEST(KernelWeight, ContinuousAcrossPieces)
{
  for (KernelKind k : kKinds)
  {
    const double w = support_width(k);
    const std::vector<double> joints = k == KernelKind::FourPoint
                                         ? std::vector<double>{1.0, 2.0}
                                         : std::vector<double>{0.5, 1.5};
    for (double x : joints)
    {
      EXPECT_LT(std::abs(kernel_weight(k, x - 1e-12) - kernel_weight(k, x + 1e-12)), 1e-10);
    }
    double prev = kernel_weight(k, -w / 2);
    for (double x = -w / 2; x <= w / 2; x += 1e-4)
    {
      const double v = kernel_weight(k, x);
      EXPECT_LT(std::abs(v - prev), 1e-3);
      prev = v;
    }
  }
}

TEST(KernelWeight, MomentConditionsAtRandomOffsets)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (KernelKind k : kKinds)
  {
    const int w = support_width(k);
    for (int t = 0; t < 100; ++t)
    {
      const double x = u(rng);
      double s0 = 0, s1 = 0, s2 = 0;
      for (int j = -w - 1; j <= w + 1; ++j)
      {
        const double v = kernel_weight(k, x - j);
        s0 += v;
        s1 += (x - j) * v;
        s2 += v * v;
      }
      EXPECT_NEAR(s0, 1.0, 1e-12);
      EXPECT_NEAR(s1, 0.0, 1e-12);
      EXPECT_NEAR(s2, kernel_square_sum(k), 1e-12);
    }
  }
}

TEST(BlobSet, StencilMatchesBruteForce)
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 8.0);
  for (KernelKind k : kKinds)
  {
    for (int d : {2, 3})
    {
      const GridSpec g = GridSpec::cube(d, 8, 0.5);
      for (int t = 0; t < 10; ++t)
      {
        // include positions that wrap around the periodic box
        const Vec3 q{u(rng) * 0.5 - 0.3, u(rng) * 0.5, d == 3 ? u(rng) * 0.5 : 0.0};
        BlobSet b(g, k, {q});
        const Eigen::VectorXd ref = oracle::brute_weights(g, k, b.positions()[0]);
        Eigen::VectorXd got = Eigen::VectorXd::Zero(ref.size());
        const auto cells = b.cells_of(0);
        const auto wts = b.weights_of(0);
        EXPECT_EQ(cells.size(), static_cast<std::size_t>(std::pow(support_width(k), d)));
        for (std::size_t m = 0; m < cells.size(); ++m)
        {
          got[static_cast<Eigen::Index>(cells[m])] += wts[m];
        }
        EXPECT_LE((got - ref).cwiseAbs().maxCoeff(), 1e-14);
      }
    }
  }
}

TEST(BlobSet, PeriodicWrapAndDirichletRejection)
{
  const GridSpec p = GridSpec::cube(3, 8, 1.0);
  BlobSet b(p, KernelKind::FourPoint, {Vec3{-0.5, 8.25, 17.0}});
  EXPECT_DOUBLE_EQ(b.positions()[0][0], 7.5);
  EXPECT_DOUBLE_EQ(b.positions()[0][1], 0.25);
  EXPECT_DOUBLE_EQ(b.positions()[0][2], 1.0);

  const GridSpec dg = GridSpec::cube(3, 8, 1.0, Boundary::dirichlet(1.0));
  EXPECT_THROW(BlobSet(dg, KernelKind::FourPoint, {Vec3{1.4, 4, 4}}), ConfigError);
  EXPECT_NO_THROW(BlobSet(dg, KernelKind::FourPoint, {Vec3{2.0, 4, 4}}));
  EXPECT_NO_THROW(BlobSet(dg, KernelKind::ThreePoint, {Vec3{1.0, 4, 4}}));
  EXPECT_THROW(BlobSet(dg, KernelKind::ThreePoint, {Vec3{0.9, 4, 4}}), ConfigError);
}

TEST(BlobSet, RejectsBadRates)
{
  const GridSpec g = GridSpec::cube(3, 8, 1.0);
  EXPECT_THROW(BlobSet(g, KernelKind::FourPoint, {Vec3{1, 1, 1}}, -1.0), ConfigError);
  EXPECT_THROW(BlobSet(g, KernelKind::FourPoint, {Vec3{1, 1, 1}}, std::vector<double>{}),
               ConfigError);
  EXPECT_THROW(kernel_from_width(5), ConfigError);
}

TEST(Interpolate, ZerothAndFirstMoments)
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(3.0, 5.0);
  for (KernelKind k : kKinds)
  {
    const GridSpec g = GridSpec::cube(3, 8, 0.5);
    std::vector<Vec3> qs;
    for (int t = 0; t < 20; ++t)
    {
      qs.push_back({u(rng) * 0.5, u(rng) * 0.5, u(rng) * 0.5});
    }
    BlobSet b(g, k, qs);
    const BlobVector c = interpolate(b, ScalarField(g, 4.0));
    const Vec3 grad{0.3, -1.2, 2.0};
    const auto lin = ScalarField::from_function(
      g, [&](const Vec3 &r) { return grad[0] * r[0] + grad[1] * r[1] + grad[2] * r[2]; });
    const BlobVector l = interpolate(b, lin);
    for (std::size_t i = 0; i < qs.size(); ++i)
    {
      EXPECT_NEAR(c[i], 4.0, 1e-13);
      const double expect = grad[0] * qs[i][0] + grad[1] * qs[i][1] + grad[2] * qs[i][2];
      EXPECT_NEAR(l[i], expect, 1e-12);
    }
  }
}

TEST(Spread, AdjointAndConservation)
{
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (KernelKind k : kKinds)
  {
    const GridSpec g = GridSpec::cube(3, 8, 0.7);
    std::vector<Vec3> qs;
    BlobVector lam;
    for (int t = 0; t < 12; ++t)
    {
      qs.push_back({8 * 0.7 * u(rng), 8 * 0.7 * u(rng), 8 * 0.7 * u(rng)});
      lam.v.push_back(2 * u(rng) - 1);
    }
    BlobSet b(g, k, qs);
    const ScalarField c = oracle::random_field(g, 2);
    const ScalarField sl = spread(b, lam);
    const double lhs = dot(sl, c) * g.cell_volume();
    const double rhs = dot(lam, interpolate(b, c));
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(rhs));

    double total = 0.0;
    for (std::size_t i = 0; i < sl.size(); ++i)
    {
      total += sl[i];
    }
    double lsum = 0.0;
    for (double v : lam.v)
    {
      lsum += v;
    }
    EXPECT_NEAR(total * g.cell_volume(), lsum, 1e-12);
    EXPECT_EQ(spread(b, BlobVector(qs.size())).max_abs(), 0.0);
  }
}

TEST(BlobVolume, PositionIndependent)
{
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int d : {2, 3})
  {
    const double h = 0.37;
    const GridSpec g = GridSpec::cube(d, 8, h);
    for (int t = 0; t < 20; ++t)
    {
      const Vec3 q{4 * h + u(rng) * h, 4 * h + u(rng) * h, d == 3 ? 4 * h + u(rng) * h : 0.0};
      const double v3 = blob_volume(BlobSet(g, KernelKind::ThreePoint, {q}), 0);
      const double v4 = blob_volume(BlobSet(g, KernelKind::FourPoint, {q}), 0);
      EXPECT_NEAR(v3 / (std::pow(2.0, d) * std::pow(h, d)), 1.0, 1e-12);
      EXPECT_NEAR(v4 / (std::pow(8.0 / 3.0, d) * std::pow(h, d)), 1.0, 1e-12);
    }
  }
}

TEST(BlobVolume, SingleSpreadThenInterpolate)
{
  const GridSpec g = GridSpec::cube(3, 8, 1.0);
  BlobSet b(g, KernelKind::ThreePoint, {Vec3{3.3, 4.1, 2.9}});
  const BlobVector js = interpolate(b, spread(b, BlobVector(1, 1.0)));
  EXPECT_NEAR(js[0], 1.0 / 8.0, 1e-14);
  EXPECT_NEAR(b.blob_volume(), 8.0, 1e-12);
}

TEST(BlobVolume, SeparatedBlobsGiveDiagonalJS)
{
  const GridSpec g = GridSpec::cube(3, 16, 1.0);
  BlobSet b(g, KernelKind::FourPoint, {Vec3{2, 2, 2}, Vec3{6.3, 2.2, 2.7}, Vec3{10, 13.5, 8.1}});
  for (std::size_t j = 0; j < b.size(); ++j)
  {
    BlobVector e(b.size());
    e[j] = 1.0;
    const BlobVector col = interpolate(b, spread(b, e));
    for (std::size_t i = 0; i < b.size(); ++i)
    {
      EXPECT_NEAR(col[i], i == j ? 1.0 / b.blob_volume() : 0.0, 1e-14);
    }
  }
}
