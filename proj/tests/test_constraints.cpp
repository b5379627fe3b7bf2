#include <doctest.h>

#include <cmath>

#include "selinf/constraints.hpp"
#include "selinf/rng.hpp"

using namespace selinf;

namespace {

Eigen::VectorXd random_point(RngStream& rng, int dim, double spread) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = spread * (rng.uniform() - 0.5);
  return v;
}

std::vector<ConstraintRegion> all_regions() {
  Eigen::VectorXd signs(4);
  signs << 1, -1, -1, 1;
  return {ConstraintRegion::orthant(signs),
          ConstraintRegion::box(-1.0, 1.0, 4),
          ConstraintRegion::box(0.5, std::numeric_limits<double>::infinity(), 4),
          ConstraintRegion::nonneg(4),
          ConstraintRegion::linf_normal_cone(2, -1.0, 4),
          ConstraintRegion::linf_normal_cone(0, 1.0, 4)};
}

}  // namespace

TEST_CASE("projection lands in the region and is idempotent") {
  RngStream rng(5);
  for (const auto& region : all_regions()) {
    for (int i = 0; i < 1000; ++i) {
      const Eigen::VectorXd x = random_point(rng, region.dim(), 8.0);
      const Eigen::VectorXd px = region.project(x);
      CHECK(region.contains(px));
      const Eigen::VectorXd ppx = region.project(px);
      CHECK((ppx - px).lpNorm<Eigen::Infinity>() <= 1e-10);
    }
  }
}

TEST_CASE("projection is non-expansive") {
  RngStream rng(6);
  for (const auto& region : all_regions()) {
    for (int i = 0; i < 1000; ++i) {
      const Eigen::VectorXd x = random_point(rng, region.dim(), 6.0);
      const Eigen::VectorXd y = random_point(rng, region.dim(), 6.0);
      const double lhs = (region.project(x) - region.project(y)).norm();
      CHECK(lhs <= (x - y).norm() + 1e-12);
    }
  }
}

TEST_CASE("members project to themselves") {
  RngStream rng(7);
  for (const auto& region : all_regions()) {
    for (int i = 0; i < 200; ++i) {
      const Eigen::VectorXd inside =
          region.project(random_point(rng, region.dim(), 5.0));
      CHECK((region.project(inside) - inside).lpNorm<Eigen::Infinity>() <=
            1e-10);
    }
  }
}

TEST_CASE("orthant and box basics") {
  Eigen::VectorXd signs(2);
  signs << 1, -1;
  const auto orth = ConstraintRegion::orthant(signs);
  Eigen::VectorXd v(2);
  v << -0.3, -2.0;
  const Eigen::VectorXd pv = orth.project(v);
  CHECK(pv[0] == 0.0);
  CHECK(pv[1] == -2.0);

  const auto box = ConstraintRegion::box(-1, 1, 2);
  v << 1.7, -0.2;
  CHECK(box.project(v)[0] == 1.0);
  CHECK(box.project(v)[1] == -0.2);
  CHECK_FALSE(box.contains(v));
}

TEST_CASE("normal cone geometry") {
  // {z : s z_pivot >= ||z||_inf} with pivot 1, sign +1
  const auto cone = ConstraintRegion::linf_normal_cone(1, 1.0, 3);
  Eigen::VectorXd z(3);
  z << 0.5, 2.0, -1.0;
  CHECK(cone.contains(z));
  z << 0.5, 1.0, -1.5;
  CHECK_FALSE(cone.contains(z));

  // Projection of a point whose pivot is dominated pulls the others in and
  // the pivot out.
  z << 3.0, 1.0, 0.0;
  const Eigen::VectorXd pz = cone.project(z);
  CHECK(cone.contains(pz));
  CHECK(pz[1] >= std::abs(pz[0]) - 1e-12);
  // stationarity: t = (z_pivot + sum of active |z_i|) / (1 + count)
  CHECK(pz[1] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(pz[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(pz[2] == 0.0);
}

TEST_CASE("cone projection beats random feasible candidates") {
  // Euclidean projection must be the closest feasible point; compare against
  // random search as an independent check.
  RngStream rng(8);
  const auto cone = ConstraintRegion::linf_normal_cone(0, 1.0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd x = random_point(rng, 3, 6.0);
    const Eigen::VectorXd px = cone.project(x);
    const double best = (px - x).squaredNorm();
    for (int i = 0; i < 400; ++i) {
      const Eigen::VectorXd cand = cone.project(random_point(rng, 3, 8.0));
      CHECK(best <= (cand - x).squaredNorm() + 1e-9);
    }
  }
}
