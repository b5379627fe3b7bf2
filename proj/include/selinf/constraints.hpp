#pragma once

#include <Eigen/Core>

namespace selinf {

enum class ConstraintKind { Unconstrained, Orthant, Box, Nonneg, LinfNormalCone };

// A constraint region for one optimization-variable block. Every kind
// implements both a membership test and the Euclidean projection.
class ConstraintRegion {
 public:
  ConstraintRegion() : kind_(ConstraintKind::Unconstrained), dim_(0) {}

  static ConstraintRegion unconstrained(int dim);
  // {v : signs_j * v_j >= 0}
  static ConstraintRegion orthant(const Eigen::VectorXd& signs);
  // [lo, hi]^dim; lo/hi may be +-inf.
  static ConstraintRegion box(double lo, double hi, int dim);
  static ConstraintRegion nonneg(int dim);
  // {z : sign * z_pivot >= ||z||_inf}, the normal cone of the l1 ball at a
  // signed vertex.
  static ConstraintRegion linf_normal_cone(int pivot_index, double sign,
                                           int dim);

  int dim() const { return dim_; }
  ConstraintKind kind() const { return kind_; }
  double box_lo() const { return lo_; }
  double box_hi() const { return hi_; }
  const Eigen::VectorXd& signs() const { return signs_; }
  int cone_pivot() const { return pivot_; }
  double cone_sign() const { return pivot_sign_; }

  bool contains(const Eigen::VectorXd& v, double tol = 1e-10) const;
  Eigen::VectorXd project(const Eigen::VectorXd& v) const;

 private:
  ConstraintRegion(ConstraintKind kind, int dim);
  ConstraintKind kind_;
  int dim_;
  Eigen::VectorXd signs_;   // orthant
  double lo_ = 0, hi_ = 0;  // box
  int pivot_ = 0;           // cone
  double pivot_sign_ = 1.0;
};

}  // namespace selinf
