#include <gtest/gtest.h>

#include "elas/benchfns.hpp"

using namespace elas;
using namespace elas::bench;

TEST(Bench, SphereCanonical) {
  auto f = make_instance(BaseFunction::Sphere, 2, 0);
  EXPECT_EQ(f.evaluate(Vector::Zero(2)), 0.0);
  EXPECT_EQ(f.evaluate(Vector::Ones(2)), 2.0);
  EXPECT_EQ(f.eval_count(), 2u);
}

TEST(Bench, RosenbrockOptimum) {
  auto f = make_instance(BaseFunction::Rosenbrock, 2, 0);
  EXPECT_EQ(f.evaluate(Vector::Ones(2)), 0.0);
}

TEST(Bench, SeedZeroIsCanonical) {
  auto f = make_instance(BaseFunction::Rastrigin, 3, 0);
  EXPECT_EQ(f.rotation(), Matrix::Identity(3, 3));
  EXPECT_EQ(f.x_opt(), Vector::Zero(3));
  EXPECT_EQ(f.f_shift(), 0.0);
}

TEST(Bench, InstancesAreDeterministic) {
  auto a = make_instance(BaseFunction::Ellipsoid, 4, 17);
  auto b = make_instance(BaseFunction::Ellipsoid, 4, 17);
  EXPECT_EQ(a.rotation(), b.rotation());
  EXPECT_EQ(a.x_opt(), b.x_opt());
  EXPECT_EQ(a.f_shift(), b.f_shift());
  auto c = make_instance(BaseFunction::Ellipsoid, 4, 18);
  EXPECT_NE(a.x_opt(), c.x_opt());
}

TEST(Bench, RotationOrthogonalAndRangesRespected) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto f = make_instance(BaseFunction::Sphere, 5, seed);
    EXPECT_LT((f.rotation().transpose() * f.rotation() - Matrix::Identity(5, 5)).norm(), 1e-10);
    EXPECT_LE(f.x_opt().cwiseAbs().maxCoeff(), 4.0);
    EXPECT_LE(std::abs(f.f_shift()), 100.0);
  }
}

TEST(Bench, OptimumPreservedUnderTransform) {
  for (auto base : {BaseFunction::Sphere, BaseFunction::Ellipsoid, BaseFunction::Rastrigin})
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto f = make_instance(base, 2, seed);
      EXPECT_NEAR(f.evaluate(f.x_opt()), f.f_shift(), 1e-12);
    }
  auto r = make_instance(BaseFunction::Rosenbrock, 3, 4);
  // Rosenbrock's optimum sits at z = 1, i.e. x = x_opt + R^T 1.
  EXPECT_NEAR(r.evaluate(r.x_opt() + r.rotation().transpose() * Vector::Ones(3)), r.f_shift(), 1e-10);
}

TEST(Bench, GridMinimumApproachesShift) {
  auto f = make_instance(BaseFunction::Ellipsoid, 2, 3);
  double best = 1e300;
  for (int i = -20; i <= 20; ++i)
    for (int j = -20; j <= 20; ++j) {
      Vector x = f.x_opt();
      x(0) += i * 1e-3;
      x(1) += j * 1e-3;
      best = std::min(best, f.evaluate(x));
    }
  EXPECT_NEAR(best, f.f_shift(), 1e-9);
  EXPECT_GE(best, f.f_shift());
  EXPECT_EQ(f.eval_count(), 41u * 41u);
}

TEST(Bench, DescriptorRoundTrip) {
  auto f = make_instance(BaseFunction::Rastrigin, 3, 9);
  auto j = descriptor(f);
  EXPECT_EQ(j["base"], "rastrigin");
  auto g = from_descriptor(j);
  EXPECT_EQ(g.x_opt(), f.x_opt());
  EXPECT_THROW(parse_base("nope"), Error);
}

TEST(Bench, OneDimensionalFunctionsAreDefined) {
  for (auto base : {BaseFunction::Sphere, BaseFunction::Ellipsoid, BaseFunction::Rosenbrock, BaseFunction::Rastrigin}) {
    auto f = make_instance(base, 1, 0);
    EXPECT_TRUE(std::isfinite(f.evaluate(Vector::Constant(1, 0.3))));
  }
}
