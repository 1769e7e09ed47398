#include "psgm/prox.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace psgm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw ParameterError(std::string(name) + " must be positive");
}

// Relative slack for domain membership; projections onto a sphere land on
// it only up to rounding.
constexpr double kDomainSlack = 1e-12;

}  // namespace

Vector prox_zero(const Vector& x, double alpha) {
  require_positive(alpha, "alpha");
  return x;
}

Vector proj_ball(const Vector& x, const Vector& center, double radius) {
  require_positive(radius, "radius");
  const Vector diff = x - center;
  const double n = diff.norm();
  if (n <= radius) return x;
  return center + diff * (radius / n);
}

Vector proj_box(const Vector& x, const Vector& lo, const Vector& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

Vector prox_l1(const Vector& x, double alpha, double weight) {
  require_positive(alpha, "alpha");
  require_positive(weight, "weight");
  const double t = alpha * weight;
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]) - t;
    out[i] = a > 0.0 ? std::copysign(a, x[i]) : 0.0;
  }
  return out;
}

Vector prox_quadratic(const Vector& x, double alpha, double weight, const Vector& center) {
  require_positive(alpha, "alpha");
  require_positive(weight, "weight");
  const double aw = alpha * weight;
  return (x + aw * center) / (1.0 + aw);
}

Regularizer Regularizer::zero() { return Regularizer{}; }

Regularizer Regularizer::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) throw ParameterError("box bounds differ in size");
  if ((lo.array() > hi.array()).any()) throw ParameterError("box has lo > hi");
  Regularizer r;
  r.kind_ = RegularizerKind::IndicatorBox;
  r.lo_ = std::move(lo);
  r.hi_ = std::move(hi);
  return r;
}

Regularizer Regularizer::box(Eigen::Index dim, double half_width) {
  require_positive(half_width, "half_width");
  return box(Vector::Constant(dim, -half_width), Vector::Constant(dim, half_width));
}

Regularizer Regularizer::ball(Vector center, double radius) {
  require_positive(radius, "radius");
  Regularizer r;
  r.kind_ = RegularizerKind::IndicatorBall;
  r.center_ = std::move(center);
  r.radius_ = radius;
  return r;
}

Regularizer Regularizer::l1(double weight) {
  require_positive(weight, "weight");
  Regularizer r;
  r.kind_ = RegularizerKind::L1;
  r.weight_ = weight;
  return r;
}

Regularizer Regularizer::quadratic(double weight, Vector center) {
  require_positive(weight, "weight");
  Regularizer r;
  r.kind_ = RegularizerKind::Quadratic;
  r.weight_ = weight;
  r.center_ = std::move(center);
  return r;
}

ExtendedValue Regularizer::value(const Vector& x) const {
  switch (kind_) {
    case RegularizerKind::Zero:
      return ExtendedValue::finite(0.0);
    case RegularizerKind::IndicatorBox:
    case RegularizerKind::IndicatorBall:
      return in_domain(x) ? ExtendedValue::finite(0.0) : ExtendedValue::plus_infinity();
    case RegularizerKind::L1:
      return ExtendedValue::finite(weight_ * x.lpNorm<1>());
    case RegularizerKind::Quadratic:
      return ExtendedValue::finite(0.5 * weight_ * (x - center_).squaredNorm());
  }
  return ExtendedValue::plus_infinity();
}

Vector Regularizer::prox(const Vector& x, double alpha) const {
  require_positive(alpha, "alpha");
  switch (kind_) {
    case RegularizerKind::Zero:
      return x;
    case RegularizerKind::IndicatorBox:
      return proj_box(x, lo_, hi_);
    case RegularizerKind::IndicatorBall:
      return proj_ball(x, center_, radius_);
    case RegularizerKind::L1:
      return prox_l1(x, alpha, weight_);
    case RegularizerKind::Quadratic:
      return prox_quadratic(x, alpha, weight_, center_);
  }
  return x;
}

bool Regularizer::in_domain(const Vector& x) const {
  if (!x.allFinite()) return false;
  switch (kind_) {
    case RegularizerKind::IndicatorBox:
      return (x.array() >= lo_.array()).all() && (x.array() <= hi_.array()).all();
    case RegularizerKind::IndicatorBall:
      return (x - center_).norm() <= radius_ * (1.0 + kDomainSlack);
    default:
      return true;
  }
}

Vector Regularizer::project_domain(const Vector& x) const {
  switch (kind_) {
    case RegularizerKind::IndicatorBox:
      return proj_box(x, lo_, hi_);
    case RegularizerKind::IndicatorBall:
      return proj_ball(x, center_, radius_);
    default:
      return x;
  }
}

std::optional<double> Regularizer::domain_diameter() const {
  switch (kind_) {
    case RegularizerKind::IndicatorBox:
      return (hi_ - lo_).norm();
    case RegularizerKind::IndicatorBall:
      return 2.0 * radius_;
    default:
      return std::nullopt;
  }
}

Vector Regularizer::subgradient(const Vector& x) const {
  switch (kind_) {
    case RegularizerKind::L1: {
      Vector s(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i)
        s[i] = x[i] > 0.0 ? weight_ : (x[i] < 0.0 ? -weight_ : 0.0);
      return s;
    }
    case RegularizerKind::Quadratic:
      return weight_ * (x - center_);
    default:
      return Vector::Zero(x.size());
  }
}

SubdifferentialSet Regularizer::subdifferential(const Vector& x, double radius) const {
  const Eigen::Index d = x.size();
  switch (kind_) {
    case RegularizerKind::Zero:
      return SubdifferentialSet::point(Vector::Zero(d));
    case RegularizerKind::Quadratic:
      return SubdifferentialSet::point(weight_ * (x - center_));
    case RegularizerKind::L1: {
      SubdifferentialSet s = SubdifferentialSet::point(Vector::Zero(d));
      std::vector<Eigen::Index> kinks;
      for (Eigen::Index i = 0; i < d; ++i) {
        if (std::abs(x[i]) <= radius)
          kinks.push_back(i);
        else
          s.base[i] = std::copysign(weight_, x[i]);
      }
      const auto k = static_cast<Eigen::Index>(kinks.size());
      s.generators = Matrix::Zero(d, k);
      s.lower = Vector::Constant(k, -1.0);
      s.upper = Vector::Constant(k, 1.0);
      for (Eigen::Index j = 0; j < k; ++j) s.generators(kinks[j], j) = weight_;
      return s;
    }
    case RegularizerKind::IndicatorBox: {
      std::vector<std::pair<Eigen::Index, int>> active;  // (coordinate, side)
      for (Eigen::Index i = 0; i < d; ++i) {
        const bool at_lo = x[i] - lo_[i] <= radius;
        const bool at_hi = hi_[i] - x[i] <= radius;
        if (at_lo) active.emplace_back(i, -1);
        if (at_hi) active.emplace_back(i, +1);
      }
      const auto k = static_cast<Eigen::Index>(active.size());
      SubdifferentialSet s{Vector::Zero(d), Matrix::Zero(d, k), Vector::Zero(k), Vector::Constant(k, kInf)};
      for (Eigen::Index j = 0; j < k; ++j)
        s.generators(active[j].first, j) = static_cast<double>(active[j].second);
      return s;
    }
    case RegularizerKind::IndicatorBall: {
      const Vector diff = x - center_;
      const double n = diff.norm();
      if (n < radius_ - radius || n == 0.0) return SubdifferentialSet::point(Vector::Zero(d));
      return {Vector::Zero(d), diff / n, Vector::Zero(1), Vector::Constant(1, kInf)};
    }
  }
  return SubdifferentialSet::point(Vector::Zero(d));
}

std::string Regularizer::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case RegularizerKind::Zero:
      os << "zero";
      break;
    case RegularizerKind::IndicatorBox:
      os << "box";
      break;
    case RegularizerKind::IndicatorBall:
      os << "ball(radius=" << radius_ << ")";
      break;
    case RegularizerKind::L1:
      os << "l1(weight=" << weight_ << ")";
      break;
    case RegularizerKind::Quadratic:
      os << "quadratic(weight=" << weight_ << ")";
      break;
  }
  return os.str();
}

}  // namespace psgm
