#pragma once

// SL(3) group / sl(3) algebra core.
//
// Group elements are 3x3 matrices with unit determinant, algebra elements are
// traceless 3x3 matrices. Coordinates on sl(3) are taken with respect to the
// Frobenius-orthonormal basis B1..B8 (see basis()).

#include <Eigen/Core>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>
#include <utility>

#include "hobs/errors.hpp"

namespace hobs {

template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using Coordinates8 = Eigen::Matrix<Scalar, 8, 1>;

template <typename Scalar>
using Matrix8 = Eigen::Matrix<Scalar, 8, 8>;

inline constexpr double kGroupDetTolerance = 1e-9;
inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kSingularDetThreshold = 1e-12;

/// Determinant evaluated in extended precision. Group elements far from the
/// identity have large entries and the double cofactor sum loses digits.
template <typename Scalar>
Scalar extended_determinant(const Matrix3<Scalar>& m) {
  return static_cast<Scalar>(m.template cast<long double>().determinant());
}

/// Element of SL(3). Construction checks |det - 1| <= 1e-9.
template <typename Scalar>
class GroupElement {
 public:
  EIGEN_MAKE_ALIGNED_OPERATOR_NEW

  GroupElement() : m_(Matrix3<Scalar>::Identity()) {}

  explicit GroupElement(const Matrix3<Scalar>& m) : m_(m) {
    const Scalar d = extended_determinant(m_);
    if (!(std::abs(d - Scalar(1)) <= Scalar(kGroupDetTolerance))) {
      throw InvariantViolation("GroupElement: determinant " +
                               std::to_string(static_cast<double>(d)) +
                               " is not 1");
    }
  }

  static GroupElement Identity() { return GroupElement(); }

  const Matrix3<Scalar>& matrix() const { return m_; }

  // det = 1, so the inverse is the adjugate; Eigen's closed-form 3x3 inverse
  // is accurate here.
  GroupElement inverse() const { return GroupElement(m_.inverse(), Unchecked{}); }

  GroupElement operator*(const GroupElement& other) const {
    return GroupElement(m_ * other.m_, Unchecked{});
  }

  Scalar determinant() const { return extended_determinant(m_); }

 private:
  struct Unchecked {};
  GroupElement(const Matrix3<Scalar>& m, Unchecked) : m_(m) {}

  template <typename S>
  friend GroupElement<S> project_sl3(const Matrix3<S>& m);

  Matrix3<Scalar> m_;
};

/// Element of sl(3). Construction checks |tr| <= 1e-12 (scaled by the norm
/// for large matrices).
template <typename Scalar>
class AlgebraElement {
 public:
  EIGEN_MAKE_ALIGNED_OPERATOR_NEW

  AlgebraElement() : a_(Matrix3<Scalar>::Zero()) {}

  explicit AlgebraElement(const Matrix3<Scalar>& a) : a_(a) {
    const Scalar tol =
        Scalar(kTraceTolerance) * std::max(Scalar(1), a_.norm());
    if (!(std::abs(a_.trace()) <= tol)) {
      throw InvariantViolation("AlgebraElement: trace " +
                               std::to_string(static_cast<double>(a_.trace())) +
                               " is not 0");
    }
  }

  /// Removes the trace part of an arbitrary matrix.
  static AlgebraElement traceless(const Matrix3<Scalar>& m) {
    Matrix3<Scalar> a = m;
    a.diagonal().array() -= m.trace() / Scalar(3);
    return AlgebraElement(a, Unchecked{});
  }

  static AlgebraElement Zero() { return AlgebraElement(); }

  const Matrix3<Scalar>& matrix() const { return a_; }

  AlgebraElement operator+(const AlgebraElement& o) const {
    return AlgebraElement(a_ + o.a_, Unchecked{});
  }
  AlgebraElement operator-(const AlgebraElement& o) const {
    return AlgebraElement(a_ - o.a_, Unchecked{});
  }
  AlgebraElement operator*(Scalar s) const {
    return AlgebraElement(a_ * s, Unchecked{});
  }
  friend AlgebraElement operator*(Scalar s, const AlgebraElement& a) {
    return a * s;
  }

  Scalar norm() const { return a_.norm(); }

 private:
  struct Unchecked {};
  AlgebraElement(const Matrix3<Scalar>& a, Unchecked) : a_(a) {}

  template <typename S>
  friend AlgebraElement<S> wedge(const Coordinates8<S>& v);

  Matrix3<Scalar> a_;
};

using Group = GroupElement<double>;
using Algebra = AlgebraElement<double>;
using Coords8 = Coordinates8<double>;
using Mat3 = Matrix3<double>;
using Vec3 = Vector3<double>;
using Mat8 = Matrix8<double>;

/// Trace inner product <A, B> = tr(A^T B).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar frobenius(const Eigen::MatrixBase<DerivedA>& a,
                                    const Eigen::MatrixBase<DerivedB>& b) {
  return (a.transpose() * b).trace();
}

/// det(M)^{-1/3} M. Rejects singular and orientation-reversing inputs.
template <typename Scalar>
GroupElement<Scalar> project_sl3(const Matrix3<Scalar>& m) {
  const Scalar d = extended_determinant(m);
  if (!(std::abs(d) >= Scalar(kSingularDetThreshold))) {
    throw DegenerateMatrix("project_sl3: |det| below 1e-12");
  }
  if (d < Scalar(0)) {
    throw OrientationError("project_sl3: negative determinant");
  }
  return GroupElement<Scalar>(m / std::cbrt(d),
                              typename GroupElement<Scalar>::Unchecked{});
}

/// Orthonormal basis element B_j, j in 1..8.
template <typename Scalar = double>
AlgebraElement<Scalar> basis(int j) {
  const Scalar r2 = Scalar(1) / std::sqrt(Scalar(2));
  const Scalar r6 = Scalar(1) / std::sqrt(Scalar(6));
  Matrix3<Scalar> b = Matrix3<Scalar>::Zero();
  switch (j) {
    case 1: b(0, 0) = r2; b(1, 1) = -r2; break;
    case 2: b(0, 1) = r2; b(1, 0) = r2; break;
    case 3: b(0, 2) = r2; b(2, 0) = r2; break;
    case 4: b(1, 2) = r2; b(2, 1) = r2; break;
    case 5: b(0, 1) = r2; b(1, 0) = -r2; break;
    case 6: b(0, 2) = r2; b(2, 0) = -r2; break;
    case 7: b(1, 2) = r2; b(2, 1) = -r2; break;
    case 8: b(0, 0) = r6; b(1, 1) = r6; b(2, 2) = -2 * r6; break;
    default:
      throw IndexOutOfRange("basis index " + std::to_string(j) +
                            " outside 1..8");
  }
  return AlgebraElement<Scalar>(b);
}

/// sum_j v_j B_j, written out entrywise.
template <typename Scalar>
AlgebraElement<Scalar> wedge(const Coordinates8<Scalar>& v) {
  const Scalar r2 = Scalar(1) / std::sqrt(Scalar(2));
  const Scalar r6 = Scalar(1) / std::sqrt(Scalar(6));
  Matrix3<Scalar> a;
  a(0, 0) = r2 * v[0] + r6 * v[7];
  a(1, 1) = -r2 * v[0] + r6 * v[7];
  a(2, 2) = Scalar(-2) * r6 * v[7];
  a(0, 1) = r2 * (v[1] + v[4]);
  a(1, 0) = r2 * (v[1] - v[4]);
  a(0, 2) = r2 * (v[2] + v[5]);
  a(2, 0) = r2 * (v[2] - v[5]);
  a(1, 2) = r2 * (v[3] + v[6]);
  a(2, 1) = r2 * (v[3] - v[6]);
  return AlgebraElement<Scalar>(a, typename AlgebraElement<Scalar>::Unchecked{});
}

/// (<A, B1>, ..., <A, B8>). Accepts any 3x3 matrix; the trace part is
/// orthogonal to sl(3) and drops out.
template <typename Derived>
Coordinates8<typename Derived::Scalar> vee(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const Scalar r2 = Scalar(1) / std::sqrt(Scalar(2));
  const Scalar r6 = Scalar(1) / std::sqrt(Scalar(6));
  Coordinates8<Scalar> v;
  v[0] = r2 * (a(0, 0) - a(1, 1));
  v[1] = r2 * (a(0, 1) + a(1, 0));
  v[2] = r2 * (a(0, 2) + a(2, 0));
  v[3] = r2 * (a(1, 2) + a(2, 1));
  v[4] = r2 * (a(0, 1) - a(1, 0));
  v[5] = r2 * (a(0, 2) - a(2, 0));
  v[6] = r2 * (a(1, 2) - a(2, 1));
  v[7] = r6 * (a(0, 0) + a(1, 1) - Scalar(2) * a(2, 2));
  return v;
}

template <typename Scalar>
Coordinates8<Scalar> vee(const AlgebraElement<Scalar>& a) {
  return vee(a.matrix());
}

/// Matrix exponential (Pade scaling and squaring), reprojected so the
/// determinant is 1 to machine precision.
template <typename Scalar>
GroupElement<Scalar> group_exp(const AlgebraElement<Scalar>& a) {
  const Matrix3<Scalar> e = a.matrix().exp();
  return project_sl3<Scalar>(e);
}

/// (P_s(A), P_a(A)): symmetric and skew parts.
template <typename Derived>
std::pair<Matrix3<typename Derived::Scalar>, Matrix3<typename Derived::Scalar>>
sym_skew_split(const Eigen::MatrixBase<Derived>& a) {
  using M = Matrix3<typename Derived::Scalar>;
  const M at = a.transpose();
  return {M((a + at) / 2), M((a - at) / 2)};
}

}  // namespace hobs
