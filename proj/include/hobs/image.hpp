#pragma once

// Raster images, their spherical view through a pinhole calibration, and the
// discretised area element used for integrals over the image domain.
//
// Pixel convention: (u, v) = (column, row), integer coordinates at pixel
// centres, top-left origin. The image domain is [0, W-1] x [0, H-1].

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hobs/sl3.hpp"
#include "hobs/sphere.hpp"

namespace hobs {

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

/// Upper-triangular pinhole calibration K mapping rays to homogeneous pixels.
class Calibration {
 public:
  Calibration() : Calibration(Mat3::Identity()) {}
  explicit Calibration(const Mat3& k);

  static Calibration pinhole(double fu, double fv, double cu, double cv);
  /// Principal point at the grid centre, focal length = width in pixels.
  static Calibration default_for(int width, int height);

  const Mat3& matrix() const { return k_; }
  const Mat3& inverse() const { return k_inv_; }

 private:
  Mat3 k_;
  Mat3 k_inv_;
};

class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, std::vector<double> data,
              Calibration calib);
  /// Constant image with the default calibration.
  RasterImage(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  const Calibration& calib() const { return calib_; }
  const std::vector<double>& data() const { return data_; }

  double at(int u, int v) const {
    return data_[static_cast<std::size_t>(v) * width_ + u];
  }
  void set(int u, int v, double value);

  /// Bilinear interpolation; requires 0 <= u <= W-1, 0 <= v <= H-1.
  double bilinear(double u, double v) const;
  /// Partial derivatives (d/du, d/dv) of the bilinear interpolant; requires
  /// 1 <= u <= W-2, 1 <= v <= H-2. On a cell edge the two one-sided slopes
  /// are averaged, so pixel centres get the +-1 px central difference.
  Pixel bilinear_gradient(double u, double v) const;

  bool contains(const Pixel& p) const {
    return p.u >= 0.0 && p.v >= 0.0 && p.u <= width_ - 1.0 &&
           p.v <= height_ - 1.0;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
  Calibration calib_;
};

Point pixel_to_ray(const Calibration& k, const Pixel& p);

/// Pixel of ray x when it lies in front of the camera and inside a
/// width x height grid; std::nullopt (out of domain) otherwise.
std::optional<Pixel> ray_to_pixel(const Calibration& k, const Point& x,
                                  int width, int height);

/// A raster viewed as a function on the sphere, optionally precomposed with
/// a homography: sample(x) = raster(pixel of A x). Zero outside the domain.
/// Warps compose the matrix A, so the raster is interpolated exactly once.
class SphericalImage {
 public:
  SphericalImage() = default;
  explicit SphericalImage(std::shared_ptr<const RasterImage> source);
  explicit SphericalImage(RasterImage source);

  const RasterImage& source() const { return *source_; }
  std::shared_ptr<const RasterImage> source_ptr() const { return source_; }
  /// The matrix A mapping query rays to source rays (up to scale).
  const Mat3& pullback() const { return pull_; }

  bool in_domain(const Point& x) const { return in_domain_ray(x.vector()); }
  double sample(const Point& x) const { return sample_ray(x.vector()); }
  /// Tangent gradient at x; zero within one pixel of the domain boundary.
  Tangent gradient(const Point& x) const;

  /// mu(H, I) = I o rho_{H^{-1}}
  SphericalImage warp(const Group& h) const;

  // Unchecked fast paths used by the quadrature loops. `x` must be unit.
  bool in_domain_ray(const Vec3& x) const;
  double sample_ray(const Vec3& x) const;
  /// Writes the value (zero-extended) and the tangent gradient (zero when
  /// masked). Returns false when the gradient is masked.
  bool sample_and_gradient(const Vec3& x, double& value, Vec3& grad) const;

 private:
  SphericalImage(std::shared_ptr<const RasterImage> source, const Mat3& pull);

  std::shared_ptr<const RasterImage> source_;
  Mat3 pull_ = Mat3::Identity();
  Mat3 k_pull_ = Mat3::Identity();  // K * A
};

SphericalImage warp(const SphericalImage& image, const Group& h);

enum class Quadrature { SolidAngle, Uniform };

std::string to_string(Quadrature q);
Quadrature parse_quadrature(const std::string& s);

struct GridSample {
  int u = 0;
  int v = 0;
  Vec3 ray = Vec3::UnitZ();
  double weight = 0.0;
};

/// One entry per pixel of a raster: its ray and its quadrature weight.
class PixelGrid {
 public:
  PixelGrid() = default;
  PixelGrid(std::vector<GridSample> samples, Quadrature q)
      : samples_(std::move(samples)), quadrature_(q) {}

  const std::vector<GridSample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  Quadrature quadrature() const { return quadrature_; }
  double total_weight() const;

 private:
  std::vector<GridSample> samples_;
  Quadrature quadrature_ = Quadrature::SolidAngle;
};

/// Solid-angle weights: 1 / (fu fv |K^{-1}(u,v,1)|^3) per unit pixel area.
PixelGrid build_pixel_grid(const RasterImage& image,
                           Quadrature q = Quadrature::SolidAngle);

// 8-bit grayscale PGM (P5) and PNG. Format is chosen by magic bytes on load
// and by file extension on save.
RasterImage load_image(const std::filesystem::path& path);
void save_image(const RasterImage& image, const std::filesystem::path& path);

RasterImage decode_pgm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_pgm(const RasterImage& image);

}  // namespace hobs
