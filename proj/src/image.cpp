#include "hobs/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hobs {

Calibration::Calibration(const Mat3& k) : k_(k) {
  const bool upper = k(1, 0) == 0.0 && k(2, 0) == 0.0 && k(2, 1) == 0.0;
  if (!upper || !(k(0, 0) > 0.0) || !(k(1, 1) > 0.0) || !(k(2, 2) > 0.0)) {
    throw InvariantViolation(
        "Calibration: K must be upper-triangular with positive diagonal");
  }
  k_inv_ = k_.inverse();
}

Calibration Calibration::pinhole(double fu, double fv, double cu, double cv) {
  Mat3 k;
  k << fu, 0.0, cu, 0.0, fv, cv, 0.0, 0.0, 1.0;
  return Calibration(k);
}

Calibration Calibration::default_for(int width, int height) {
  return pinhole(width, width, 0.5 * (width - 1), 0.5 * (height - 1));
}

RasterImage::RasterImage(int width, int height, std::vector<double> data,
                         Calibration calib)
    : width_(width), height_(height), data_(std::move(data)), calib_(calib) {
  if (width_ <= 0 || height_ <= 0) {
    throw InvariantViolation("RasterImage: empty dimensions");
  }
  if (data_.size() != static_cast<std::size_t>(width_) * height_) {
    throw InvariantViolation("RasterImage: data size does not match W x H");
  }
  for (double d : data_) {
    if (!(d >= 0.0 && d <= 1.0)) {
      throw InvariantViolation("RasterImage: intensity outside [0,1]");
    }
  }
}

RasterImage::RasterImage(int width, int height, double fill)
    : RasterImage(width, height,
                  std::vector<double>(static_cast<std::size_t>(
                                          std::max(width, 0)) *
                                          std::max(height, 0),
                                      fill),
                  Calibration::default_for(width, height)) {}

void RasterImage::set(int u, int v, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw InvariantViolation("RasterImage: intensity outside [0,1]");
  }
  data_[static_cast<std::size_t>(v) * width_ + u] = value;
}

double RasterImage::bilinear(double u, double v) const {
  int u0 = static_cast<int>(std::floor(u));
  int v0 = static_cast<int>(std::floor(v));
  u0 = std::clamp(u0, 0, std::max(width_ - 2, 0));
  v0 = std::clamp(v0, 0, std::max(height_ - 2, 0));
  const int u1 = std::min(u0 + 1, width_ - 1);
  const int v1 = std::min(v0 + 1, height_ - 1);
  const double fu = u - u0;
  const double fv = v - v0;
  const double top = (1.0 - fu) * at(u0, v0) + fu * at(u1, v0);
  const double bottom = (1.0 - fu) * at(u0, v1) + fu * at(u1, v1);
  return (1.0 - fv) * top + fv * bottom;
}

namespace {

// Slope of the interpolant across u at fixed v, given sample(u) along the line.
template <typename Sample>
double edge_aware_slope(double u, Sample sample) {
  constexpr double kEdge = 1e-9;
  const double nearest = std::round(u);
  if (std::abs(u - nearest) <= kEdge) {
    return 0.5 * (sample(nearest + 1.0) - sample(nearest - 1.0));
  }
  const double u0 = std::floor(u);
  return sample(u0 + 1.0) - sample(u0);
}

}  // namespace

Pixel RasterImage::bilinear_gradient(double u, double v) const {
  return Pixel{edge_aware_slope(u, [&](double x) { return bilinear(x, v); }),
               edge_aware_slope(v, [&](double y) { return bilinear(u, y); })};
}

Point pixel_to_ray(const Calibration& k, const Pixel& p) {
  return Point(k.inverse() * Vec3(p.u, p.v, 1.0));
}

std::optional<Pixel> ray_to_pixel(const Calibration& k, const Point& x,
                                  int width, int height) {
  const Vec3 q = k.matrix() * x.vector();
  if (!(q[2] > 0.0)) return std::nullopt;
  const Pixel p{q[0] / q[2], q[1] / q[2]};
  if (!(p.u >= 0.0 && p.v >= 0.0 && p.u <= width - 1.0 && p.v <= height - 1.0)) {
    return std::nullopt;
  }
  return p;
}

SphericalImage::SphericalImage(std::shared_ptr<const RasterImage> source)
    : SphericalImage(std::move(source), Mat3::Identity()) {}

SphericalImage::SphericalImage(RasterImage source)
    : SphericalImage(std::make_shared<const RasterImage>(std::move(source))) {}

SphericalImage::SphericalImage(std::shared_ptr<const RasterImage> source,
                               const Mat3& pull)
    : source_(std::move(source)), pull_(pull) {
  k_pull_ = source_->calib().matrix() * pull_;
}

SphericalImage SphericalImage::warp(const Group& h) const {
  // I(rho(H^{-1}, x)) samples the source at A H x.
  return SphericalImage(source_, pull_ * h.matrix());
}

SphericalImage warp(const SphericalImage& image, const Group& h) {
  return image.warp(h);
}

bool SphericalImage::in_domain_ray(const Vec3& x) const {
  const Vec3 q = k_pull_ * x;
  if (!(q[2] > 0.0)) return false;
  return source_->contains(Pixel{q[0] / q[2], q[1] / q[2]});
}

double SphericalImage::sample_ray(const Vec3& x) const {
  const Vec3 q = k_pull_ * x;
  if (!(q[2] > 0.0)) return 0.0;
  const Pixel p{q[0] / q[2], q[1] / q[2]};
  if (!source_->contains(p)) return 0.0;
  return source_->bilinear(p.u, p.v);
}

bool SphericalImage::sample_and_gradient(const Vec3& x, double& value,
                                         Vec3& grad) const {
  value = 0.0;
  grad.setZero();
  const Vec3 q = k_pull_ * x;
  if (!(q[2] > 0.0)) return false;
  const double pu = q[0] / q[2];
  const double pv = q[1] / q[2];
  const RasterImage& src = *source_;
  if (!src.contains(Pixel{pu, pv})) return false;
  value = src.bilinear(pu, pv);
  if (!(pu - 1.0 >= 0.0 && pu + 1.0 <= src.width() - 1.0 && pv - 1.0 >= 0.0 &&
        pv + 1.0 <= src.height() - 1.0)) {
    return false;
  }
  const Pixel g = src.bilinear_gradient(pu, pv);
  const double gu = g.u;
  const double gv = g.v;
  // d(pixel)/dx = (1/q2) [[1, 0, -pu], [0, 1, -pv]] K A
  const Vec3 row(gu, gv, -pu * gu - pv * gv);
  grad = k_pull_.transpose() * row / q[2];
  grad -= x * x.dot(grad);
  return true;
}

Tangent SphericalImage::gradient(const Point& x) const {
  double value = 0.0;
  Vec3 g;
  sample_and_gradient(x.vector(), value, g);
  return Tangent(x, g);
}

std::string to_string(Quadrature q) {
  return q == Quadrature::SolidAngle ? "solid_angle" : "uniform";
}

Quadrature parse_quadrature(const std::string& s) {
  if (s == "solid_angle") return Quadrature::SolidAngle;
  if (s == "uniform") return Quadrature::Uniform;
  throw ConfigError("unknown quadrature '" + s +
                    "' (expected solid_angle or uniform)");
}

double PixelGrid::total_weight() const {
  return std::accumulate(samples_.begin(), samples_.end(), 0.0,
                         [](double acc, const GridSample& s) {
                           return acc + s.weight;
                         });
}

PixelGrid build_pixel_grid(const RasterImage& image, Quadrature q) {
  const Mat3& kinv = image.calib().inverse();
  // (a, b) = first two coordinates of K^{-1}(u, v, 1) scaled to unit depth
  const double area =
      std::abs(kinv(0, 0) * kinv(1, 1)) / (kinv(2, 2) * kinv(2, 2));
  std::vector<GridSample> samples;
  samples.reserve(image.size());
  for (int v = 0; v < image.height(); ++v) {
    for (int u = 0; u < image.width(); ++u) {
      Vec3 plane = kinv * Vec3(u, v, 1.0);
      plane /= plane[2];
      const double n = plane.norm();
      GridSample s;
      s.u = u;
      s.v = v;
      s.ray = plane / n;
      // plane point has unit depth, so dOmega = dA / |q|^3
      s.weight = q == Quadrature::SolidAngle ? area / (n * n * n) : 1.0;
      samples.push_back(s);
    }
  }
  return PixelGrid(std::move(samples), q);
}

}  // namespace hobs
