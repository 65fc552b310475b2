#pragma once

// Shared fixtures for the test binaries: seeded random draws and an
// analytically defined smooth test image.

#include <cmath>
#include <filesystem>
#include <string>
#include <utility>
#include <unistd.h>
#include <random>
#include <vector>

#include "hobs/image.hpp"
#include "hobs/sl3.hpp"
#include "hobs/sphere.hpp"

namespace hobs::test {

using Rng = std::mt19937_64;

inline Coords8 random_coords(Rng& rng, double bound = 1.0) {
  std::uniform_real_distribution<double> d(-bound, bound);
  Coords8 c;
  for (int i = 0; i < 8; ++i) c[i] = d(rng);
  return c;
}

/// exp of uniform basis coordinates in [-bound, bound].
inline Group random_group(Rng& rng, double bound = 1.0) {
  return group_exp(wedge<double>(random_coords(rng, bound)));
}

inline Point random_point(Rng& rng) {
  std::normal_distribution<double> n;
  return Point(Vec3(n(rng), n(rng), n(rng)));
}

inline Mat3 random_matrix(Rng& rng, double bound = 1.0) {
  std::uniform_real_distribution<double> d(-bound, bound);
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i) = d(rng);
  return m;
}

/// Orthonormal tangent basis at y.
inline std::pair<Vec3, Vec3> tangent_frame(const Point& y) {
  const Vec3& n = y.vector();
  const Vec3 seed = std::abs(n[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 a = (seed - n * n.dot(seed)).normalized();
  return {a, n.cross(a)};
}

/// Smooth test pattern, zero with vanishing slope on the raster border:
///   I(u, v) = s(u) s(v) (0.5 + 0.2 sin(a) cos(b) + 0.15 sin(a/2 + b))
/// with s(p) = sin^2(pi p / (n - 1)), a = 2 pi u / 40, b = 2 pi v / 34.
inline double smooth_pattern(double u, double v, int width, int height) {
  const double su = std::sin(M_PI * u / (width - 1));
  const double sv = std::sin(M_PI * v / (height - 1));
  const double a = 2.0 * M_PI * u / 40.0;
  const double b = 2.0 * M_PI * v / 34.0;
  return su * su * sv * sv *
         (0.5 + 0.2 * std::sin(a) * std::cos(b) + 0.15 * std::sin(0.5 * a + b));
}

inline RasterImage smooth_image(int width = 128, int height = 128) {
  std::vector<double> data(static_cast<std::size_t>(width) * height);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      data[static_cast<std::size_t>(v) * width + u] = smooth_pattern(u, v, width, height);
    }
  }
  return RasterImage(width, height, std::move(data), Calibration::default_for(width, height));
}

/// Fresh per-process scratch directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("hobs_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace hobs::test
