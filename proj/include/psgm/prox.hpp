#pragma once

#include "psgm/types.hpp"

#include <optional>

namespace psgm {

/// r(x) in R u {+inf}. Infinity is a flag, never an overflowed double.
struct ExtendedValue {
  double value = 0.0;
  bool infinite = false;

  static ExtendedValue finite(double v) { return {v, false}; }
  static ExtendedValue plus_infinity() { return {0.0, true}; }
};

enum class RegularizerKind { Zero, IndicatorBox, IndicatorBall, L1, Quadratic };

// Closed-form proximal maps. Each returns argmin_y { r(y) + |y - x|^2 / (2 alpha) }.
Vector prox_zero(const Vector& x, double alpha);
Vector proj_ball(const Vector& x, const Vector& center, double radius);
Vector proj_box(const Vector& x, const Vector& lo, const Vector& hi);
Vector prox_l1(const Vector& x, double alpha, double weight);
/// Prox of r(y) = (weight / 2) |y - center|^2.
Vector prox_quadratic(const Vector& x, double alpha, double weight, const Vector& center);

/// Convex regularizer r with an exact proximal map.
///
/// Indicator kinds ignore the step alpha; every kind is driven through the
/// same (x, alpha) signature so the solvers can treat them uniformly.
class Regularizer {
 public:
  static Regularizer zero();
  static Regularizer box(Vector lo, Vector hi);
  static Regularizer box(Eigen::Index dim, double half_width);
  static Regularizer ball(Vector center, double radius);
  static Regularizer l1(double weight);
  static Regularizer quadratic(double weight, Vector center);

  RegularizerKind kind() const { return kind_; }
  bool is_indicator() const {
    return kind_ == RegularizerKind::IndicatorBox || kind_ == RegularizerKind::IndicatorBall;
  }
  /// The projected setting: prox is a projection.
  bool is_indicator_or_zero() const { return is_indicator() || kind_ == RegularizerKind::Zero; }

  ExtendedValue value(const Vector& x) const;
  Vector prox(const Vector& x, double alpha) const;

  bool in_domain(const Vector& x) const;
  /// Nearest point of dom r (identity when dom r is the whole space).
  Vector project_domain(const Vector& x) const;
  /// Diameter of dom r, absent when unbounded.
  std::optional<double> domain_diameter() const;

  /// A subgradient of the finite part of r (zero for indicators, which
  /// always contain 0 in their normal cone on the domain).
  Vector subgradient(const Vector& x) const;

  /// dr(x) with kinks and active constraints detected within `radius`.
  SubdifferentialSet subdifferential(const Vector& x, double radius) const;

  // Parameter access for the kinds that carry them.
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }
  double weight() const { return weight_; }

  std::string describe() const;

 private:
  RegularizerKind kind_ = RegularizerKind::Zero;
  Vector lo_, hi_, center_;
  double radius_ = 0.0;
  double weight_ = 0.0;
};

}  // namespace psgm
