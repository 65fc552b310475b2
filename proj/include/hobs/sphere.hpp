#pragma once

// Right action of SL(3) on the unit sphere and its first-order geometry.
//
//   rho(H, x) = H^{-1} x / |H^{-1} x|
//   rho(G, rho(H, x)) = rho(H G, x)

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>

#include "hobs/errors.hpp"
#include "hobs/sl3.hpp"

namespace hobs {

inline constexpr double kTangencyTolerance = 1e-10;

template <typename Scalar>
class SpherePoint {
 public:
  EIGEN_MAKE_ALIGNED_OPERATOR_NEW

  SpherePoint() : x_(Vector3<Scalar>::UnitZ()) {}

  /// Normalizes the input; zero vectors are rejected.
  explicit SpherePoint(const Vector3<Scalar>& v) {
    const Scalar n = v.norm();
    if (!(n > Scalar(0))) {
      throw InvariantViolation("SpherePoint: zero vector");
    }
    x_ = v / n;
  }

  const Vector3<Scalar>& vector() const { return x_; }
  Scalar operator[](int i) const { return x_[i]; }

 private:
  Vector3<Scalar> x_;
};

/// A vector in T_x S^2 together with its base point. Tangency is checked.
template <typename Scalar>
class TangentVector {
 public:
  EIGEN_MAKE_ALIGNED_OPERATOR_NEW

  TangentVector(const SpherePoint<Scalar>& base, const Vector3<Scalar>& v)
      : base_(base), v_(v) {
    const Scalar tol =
        Scalar(kTangencyTolerance) * std::max(Scalar(1), v_.norm());
    if (!(std::abs(v_.dot(base_.vector())) <= tol)) {
      throw InvariantViolation("TangentVector: vector not tangent at base");
    }
  }

  const SpherePoint<Scalar>& base() const { return base_; }
  const Vector3<Scalar>& vector() const { return v_; }
  Scalar norm() const { return v_.norm(); }

 private:
  SpherePoint<Scalar> base_;
  Vector3<Scalar> v_;
};

using Point = SpherePoint<double>;
using Tangent = TangentVector<double>;

/// pi_x = I - x x^T
template <typename Scalar>
Matrix3<Scalar> tangent_projector(const SpherePoint<Scalar>& x) {
  return Matrix3<Scalar>::Identity() - x.vector() * x.vector().transpose();
}

template <typename Scalar>
TangentVector<Scalar> tangent_project(const SpherePoint<Scalar>& x,
                                      const Vector3<Scalar>& v) {
  const Vector3<Scalar>& n = x.vector();
  return TangentVector<Scalar>(x, v - n * n.dot(v));
}

template <typename Scalar>
SpherePoint<Scalar> act_rho(const GroupElement<Scalar>& h,
                            const SpherePoint<Scalar>& x) {
  return SpherePoint<Scalar>(h.inverse().matrix() * x.vector());
}

/// Velocity of t -> rho(exp(t D), x) at t = 0: -pi_x D x.
template <typename Scalar>
TangentVector<Scalar> d_rho_identity(const SpherePoint<Scalar>& x,
                                     const AlgebraElement<Scalar>& d) {
  const Vector3<Scalar> dx = d.matrix() * x.vector();
  const Vector3<Scalar>& n = x.vector();
  return TangentVector<Scalar>(x, -(dx - n * n.dot(dx)));
}

/// Differential of y -> rho(H, y), a linear map T_y S^2 -> T_{rho(H,y)} S^2.
template <typename Scalar>
class ActionDifferential {
 public:
  EIGEN_MAKE_ALIGNED_OPERATOR_NEW

  ActionDifferential(const GroupElement<Scalar>& h, const SpherePoint<Scalar>& y)
      : source_(y) {
    const Matrix3<Scalar> hinv = h.inverse().matrix();
    const Vector3<Scalar> w = hinv * y.vector();
    target_ = SpherePoint<Scalar>(w);
    m_ = tangent_projector(target_) * hinv / w.norm();
  }

  const SpherePoint<Scalar>& source() const { return source_; }
  const SpherePoint<Scalar>& target() const { return target_; }
  const Matrix3<Scalar>& matrix() const { return m_; }

  TangentVector<Scalar> operator()(const TangentVector<Scalar>& v) const {
    // Only tangent vectors at the source point are meaningful inputs.
    if (!(source_.vector() - v.base().vector()).isZero(Scalar(1e-12))) {
      throw InvariantViolation("ActionDifferential: base point mismatch");
    }
    return TangentVector<Scalar>(target_, m_ * v.vector());
  }

 private:
  SpherePoint<Scalar> source_;
  SpherePoint<Scalar> target_;
  Matrix3<Scalar> m_;
};

template <typename Scalar>
ActionDifferential<Scalar> d_rho(const GroupElement<Scalar>& h,
                                 const SpherePoint<Scalar>& y) {
  return ActionDifferential<Scalar>(h, y);
}

/// Area distortion of rho_H at y: det(H^{-1}) / |H^{-1} y|^3 = 1 / |H^{-1} y|^3.
template <typename Scalar>
Scalar jacobian_det(const GroupElement<Scalar>& h, const SpherePoint<Scalar>& y) {
  const Scalar b = (h.inverse().matrix() * y.vector()).norm();
  return Scalar(1) / (b * b * b);
}

}  // namespace hobs
