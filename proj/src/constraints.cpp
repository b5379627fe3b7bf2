#include "selinf/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace selinf {

ConstraintRegion::ConstraintRegion(ConstraintKind kind, int dim)
    : kind_(kind), dim_(dim) {
  if (dim < 0) throw std::invalid_argument("constraint dim must be >= 0");
}

ConstraintRegion ConstraintRegion::unconstrained(int dim) {
  return ConstraintRegion(ConstraintKind::Unconstrained, dim);
}

ConstraintRegion ConstraintRegion::orthant(const Eigen::VectorXd& signs) {
  ConstraintRegion r(ConstraintKind::Orthant, static_cast<int>(signs.size()));
  r.signs_ = signs;
  return r;
}

ConstraintRegion ConstraintRegion::box(double lo, double hi, int dim) {
  if (!(lo <= hi)) throw std::invalid_argument("box: lo must be <= hi");
  ConstraintRegion r(ConstraintKind::Box, dim);
  r.lo_ = lo;
  r.hi_ = hi;
  return r;
}

ConstraintRegion ConstraintRegion::nonneg(int dim) {
  return ConstraintRegion(ConstraintKind::Nonneg, dim);
}

ConstraintRegion ConstraintRegion::linf_normal_cone(int pivot_index,
                                                    double sign, int dim) {
  if (pivot_index < 0 || pivot_index >= dim) {
    throw std::invalid_argument("linf_normal_cone: pivot out of range");
  }
  ConstraintRegion r(ConstraintKind::LinfNormalCone, dim);
  r.pivot_ = pivot_index;
  r.pivot_sign_ = sign >= 0 ? 1.0 : -1.0;
  return r;
}

bool ConstraintRegion::contains(const Eigen::VectorXd& v, double tol) const {
  if (v.size() != dim_) {
    throw std::invalid_argument("constraint membership: dimension mismatch");
  }
  switch (kind_) {
    case ConstraintKind::Unconstrained:
      return true;
    case ConstraintKind::Orthant:
      for (int i = 0; i < dim_; ++i) {
        if (signs_[i] * v[i] < -tol) return false;
      }
      return true;
    case ConstraintKind::Box:
      for (int i = 0; i < dim_; ++i) {
        if (v[i] < lo_ - tol || v[i] > hi_ + tol) return false;
      }
      return true;
    case ConstraintKind::Nonneg:
      return (v.array() >= -tol).all();
    case ConstraintKind::LinfNormalCone: {
      const double t = pivot_sign_ * v[pivot_];
      if (t < -tol) return false;
      for (int i = 0; i < dim_; ++i) {
        if (std::abs(v[i]) > t + tol) return false;
      }
      return true;
    }
  }
  return false;
}

Eigen::VectorXd ConstraintRegion::project(const Eigen::VectorXd& v) const {
  if (v.size() != dim_) {
    throw std::invalid_argument("constraint projection: dimension mismatch");
  }
  switch (kind_) {
    case ConstraintKind::Unconstrained:
      return v;
    case ConstraintKind::Orthant: {
      Eigen::VectorXd out = v;
      for (int i = 0; i < dim_; ++i) {
        if (signs_[i] * out[i] < 0.0) out[i] = 0.0;
      }
      return out;
    }
    case ConstraintKind::Box: {
      Eigen::VectorXd out = v;
      for (int i = 0; i < dim_; ++i) out[i] = std::clamp(out[i], lo_, hi_);
      return out;
    }
    case ConstraintKind::Nonneg:
      return v.cwiseMax(0.0);
    case ConstraintKind::LinfNormalCone: {
      // Projection reduces to the 1-D convex problem in t = sign*z_pivot:
      //   min_{t>=0} (t - a)^2 + sum_{i != pivot} (clamp(z_i,-t,t) - z_i)^2,
      // solved by ternary search, then one exact stationarity step on the
      // active set so the projection is idempotent to machine precision.
      const double a = pivot_sign_ * v[pivot_];
      double hi = std::max(a, 0.0);
      for (int i = 0; i < dim_; ++i) {
        if (i != pivot_) hi = std::max(hi, std::abs(v[i]));
      }
      auto objective = [&](double t) {
        double s = (t - a) * (t - a);
        for (int i = 0; i < dim_; ++i) {
          if (i == pivot_) continue;
          const double ex = std::max(std::abs(v[i]) - t, 0.0);
          s += ex * ex;
        }
        return s;
      };
      double lo = 0.0, up = hi + 1.0;
      while (up - lo > 1e-12) {
        const double m1 = lo + (up - lo) / 3.0;
        const double m2 = up - (up - lo) / 3.0;
        if (objective(m1) < objective(m2)) {
          up = m2;
        } else {
          lo = m1;
        }
      }
      double t = 0.5 * (lo + up);
      // Stationarity: t = (a + sum of |z_i| over the active set) / (1+count).
      double acc = a;
      int count = 0;
      for (int i = 0; i < dim_; ++i) {
        if (i == pivot_) continue;
        if (std::abs(v[i]) > t) {
          acc += std::abs(v[i]);
          ++count;
        }
      }
      t = std::max(acc / (1.0 + count), 0.0);
      Eigen::VectorXd out(dim_);
      for (int i = 0; i < dim_; ++i) {
        out[i] = (i == pivot_) ? pivot_sign_ * t : std::clamp(v[i], -t, t);
      }
      return out;
    }
  }
  return v;
}

}  // namespace selinf
