#include <doctest.h>

#include <cmath>

#include "hobs/sl3.hpp"
#include "support.hpp"

using namespace hobs;
using hobs::test::Rng;

namespace {

// Truncated Taylor series of the matrix exponential in long double.
Matrix3<long double> series_exp(const Mat3& a, int terms = 30) {
  const Matrix3<long double> al = a.cast<long double>();
  Matrix3<long double> sum = Matrix3<long double>::Identity();
  Matrix3<long double> term = Matrix3<long double>::Identity();
  for (int k = 1; k < terms; ++k) {
    term = term * al / static_cast<long double>(k);
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("basis matches the listed matrices") {
  const double r2 = 1.0 / std::sqrt(2.0);
  Mat3 b1 = Mat3::Zero();
  b1(0, 0) = r2;
  b1(1, 1) = -r2;
  CHECK((basis(1).matrix() - b1).norm() == 0.0);

  Mat3 b5 = Mat3::Zero();
  b5(0, 1) = r2;
  b5(1, 0) = -r2;
  CHECK((basis(5).matrix() - b5).norm() == 0.0);

  const Mat3 b8 = Vec3(1, 1, -2).asDiagonal() * (1.0 / std::sqrt(6.0));
  CHECK((basis(8).matrix() - b8).norm() < 1e-16);

  CHECK_THROWS_AS(basis(0), IndexOutOfRange);
  CHECK_THROWS_AS(basis(9), IndexOutOfRange);
}

TEST_CASE("basis is orthonormal and traceless") {
  for (int i = 1; i <= 8; ++i) {
    CHECK(std::abs(basis(i).matrix().trace()) < 1e-15);
    for (int j = 1; j <= 8; ++j) {
      CHECK(frobenius(basis(i).matrix(), basis(j).matrix()) ==
            doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-15));
    }
  }
}

TEST_CASE("wedge agrees with the basis expansion") {
  Rng rng(1);
  for (int n = 0; n < 200; ++n) {
    const Coords8 v = test::random_coords(rng, 3.0);
    Mat3 expansion = Mat3::Zero();
    for (int j = 0; j < 8; ++j) expansion += v[j] * basis(j + 1).matrix();
    CHECK((wedge<double>(v).matrix() - expansion).norm() < 1e-14);
  }
  CHECK(wedge<double>(Coords8::Zero()).matrix().isZero(0.0));
  CHECK((vee(basis(1)) - Coords8::Unit(0)).norm() < 1e-15);
}

TEST_CASE("wedge and vee are inverse isometries") {
  Rng rng(2);
  const Coords8 ones = Coords8::Ones();
  CHECK((vee(wedge<double>(ones)) - ones).cwiseAbs().maxCoeff() < 1e-14);
  for (int n = 0; n < 1000; ++n) {
    const Coords8 v = test::random_coords(rng, 2.0);
    CHECK((vee(wedge<double>(v)) - v).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(wedge<double>(v).norm() == doctest::Approx(v.norm()).epsilon(1e-14));

    const Algebra a = Algebra::traceless(test::random_matrix(rng, 2.0));
    CHECK((wedge<double>(vee(a)).matrix() - a.matrix()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("vee drops the trace part") {
  CHECK(vee(Mat3::Identity()).norm() < 1e-16);
}

TEST_CASE("algebra elements reject a trace") {
  Mat3 m = Mat3::Zero();
  m(0, 0) = 1e-3;
  CHECK_THROWS_AS(Algebra{m}, InvariantViolation);
  CHECK(std::abs(Algebra::traceless(m).matrix().trace()) < 1e-18);
}

TEST_CASE("group elements reject det != 1") {
  CHECK_THROWS_AS(Group(Mat3(2.0 * Mat3::Identity())), InvariantViolation);
  CHECK_NOTHROW(Group(Mat3::Identity()));
}

TEST_CASE("project_sl3") {
  CHECK((project_sl3<double>(Mat3::Identity()).matrix() - Mat3::Identity()).norm() == 0.0);
  CHECK((project_sl3<double>(2.0 * Mat3::Identity()).matrix() - Mat3::Identity()).norm() <
        1e-15);

  Rng rng(3);
  for (int n = 0; n < 200; ++n) {
    Mat3 m = test::random_matrix(rng);
    if (m.determinant() < 0) m.col(0) *= -1.0;
    if (m.determinant() < 1e-3) continue;
    m *= std::cbrt(3.7 / m.determinant());
    REQUIRE(m.determinant() == doctest::Approx(3.7).epsilon(1e-12));
    const Group g = project_sl3<double>(m);
    CHECK(std::abs(g.determinant() - 1.0) < 1e-12);
    CHECK((g.matrix() - m / std::cbrt(3.7)).norm() < 1e-14 * m.norm());
  }

  CHECK_THROWS_AS(project_sl3<double>(Mat3::Zero()), DegenerateMatrix);
  CHECK_THROWS_AS(project_sl3<double>(Mat3(Vec3(1, 1, -1).asDiagonal())), OrientationError);
}

TEST_CASE("group_exp matches a truncated series") {
  CHECK((group_exp(Algebra::Zero()).matrix() - Mat3::Identity()).norm() == 0.0);

  Rng rng(4);
  for (int n = 0; n < 200; ++n) {
    Coords8 c = test::random_coords(rng);
    c *= (2.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng)) / c.norm();
    const Mat3 e = group_exp(wedge<double>(c)).matrix();
    const Matrix3<long double> ref = series_exp(wedge<double>(c).matrix());
    const long double rel = (e.cast<long double>() - ref).norm() / ref.norm();
    CHECK(static_cast<double>(rel) < 1e-12);
  }
}

TEST_CASE("exp(pi sqrt2 B5) is a half turn about e3") {
  const Mat3 r = group_exp(basis(5) * (M_PI * std::sqrt(2.0))).matrix();
  const Mat3 half_turn = Vec3(-1, -1, 1).asDiagonal();
  CHECK((r - half_turn).norm() < 1e-12);
  const Matrix3<long double> ref = series_exp((basis(5) * (M_PI * std::sqrt(2.0))).matrix(), 40);
  CHECK(static_cast<double>((r.cast<long double>() - ref).norm()) < 1e-12);
}

TEST_CASE("det(exp A) = 1 for |A| up to 10") {
  Rng rng(5);
  for (int n = 0; n < 200; ++n) {
    Coords8 c = test::random_coords(rng);
    c *= 10.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng) / c.norm();
    CHECK(std::abs(group_exp(wedge<double>(c)).determinant() - 1.0) < 1e-10);
  }
}

TEST_CASE("sym_skew_split") {
  Rng rng(6);
  for (int n = 0; n < 100; ++n) {
    const Mat3 a = test::random_matrix(rng);
    const auto [s, w] = sym_skew_split(a);
    CHECK((s + w - a).norm() < 1e-15);
    CHECK(std::abs(frobenius(s, w)) < 1e-15);
    CHECK((s - s.transpose()).norm() == 0.0);
    CHECK((w + w.transpose()).norm() == 0.0);
  }
  const Mat3 e12 = Vec3::UnitX() * Vec3::UnitY().transpose();
  const auto [s, w] = sym_skew_split(e12);
  Mat3 s_expected = Mat3::Zero();
  s_expected(0, 1) = s_expected(1, 0) = 0.5;
  Mat3 w_expected = Mat3::Zero();
  w_expected(0, 1) = 0.5;
  w_expected(1, 0) = -0.5;
  CHECK((s - s_expected).norm() == 0.0);
  CHECK((w - w_expected).norm() == 0.0);

  const auto [s2, w2] = sym_skew_split(basis(2).matrix());
  CHECK(w2.norm() == 0.0);
  const auto [s3, w3] = sym_skew_split(basis(6).matrix());
  CHECK(s3.norm() == 0.0);
}

TEST_CASE("frobenius") {
  CHECK(frobenius(Mat3::Identity(), Mat3::Identity()) == 3.0);
  CHECK(frobenius(basis(1).matrix(), basis(2).matrix()) == 0.0);
  Rng rng(7);
  for (int n = 0; n < 100; ++n) {
    const Mat3 a = test::random_matrix(rng);
    const Mat3 b = test::random_matrix(rng);
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) sum += a(i, j) * b(i, j);
    }
    CHECK(frobenius(a, b) == doctest::Approx(sum).epsilon(1e-14));
  }
}

TEST_CASE("scalar-generic instantiation") {
  const auto b = basis<float>(3);
  CHECK(vee(b)[2] == doctest::Approx(1.0f));
  const auto g = group_exp(wedge<long double>(Coordinates8<long double>::Constant(0.1L)));
  CHECK(std::abs(static_cast<double>(g.determinant()) - 1.0) < 1e-15);
}
