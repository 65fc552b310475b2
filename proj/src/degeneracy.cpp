#include "hobs/degeneracy.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hobs/sphere.hpp"

namespace hobs {
namespace {

struct Seed {
  Vec3 ray;
  double intensity;
};

// Uniform buckets over pixel space, padded by one cell on every side.
class SeedBuckets {
 public:
  SeedBuckets(const std::vector<Seed>& seeds, const Calibration& k, int width,
              int height, double cell_px)
      : cell_(cell_px),
        nx_(static_cast<int>(std::ceil(width / cell_px)) + 2),
        ny_(static_cast<int>(std::ceil(height / cell_px)) + 2),
        cells_(static_cast<std::size_t>(nx_) * ny_) {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const Vec3 q = k.matrix() * seeds[i].ray;
      const int cx = cell_x(q[0] / q[2]);
      const int cy = cell_y(q[1] / q[2]);
      cells_[static_cast<std::size_t>(cy) * nx_ + cx].push_back(i);
    }
  }

  // Calls fn(seed index) for seeds in the 3x3 cell neighbourhood of (u, v).
  template <typename Fn>
  void for_near(double u, double v, Fn fn) const {
    const int cx = cell_x(u);
    const int cy = cell_y(v);
    if (cx < 0 || cy < 0 || cx >= nx_ || cy >= ny_) return;
    for (int y = std::max(cy - 1, 0); y <= std::min(cy + 1, ny_ - 1); ++y) {
      for (int x = std::max(cx - 1, 0); x <= std::min(cx + 1, nx_ - 1); ++x) {
        for (std::size_t i : cells_[static_cast<std::size_t>(y) * nx_ + x]) fn(i);
      }
    }
  }

 private:
  int cell_x(double u) const {
    return static_cast<int>(std::floor(u / cell_)) + 1;
  }
  int cell_y(double v) const {
    return static_cast<int>(std::floor(v / cell_)) + 1;
  }

  double cell_;
  int nx_;
  int ny_;
  std::vector<std::vector<std::size_t>> cells_;
};

// Period of exp(t D) when all orbits are closed (purely imaginary spectrum).
std::optional<double> closed_orbit_period(const Mat3& d) {
  Eigen::EigenSolver<Mat3> eig(d, false);
  const auto& ev = eig.eigenvalues();
  const double scale = d.norm();
  double max_re = 0.0;
  double max_im = 0.0;
  for (int i = 0; i < 3; ++i) {
    max_re = std::max(max_re, std::abs(ev[i].real()));
    max_im = std::max(max_im, std::abs(ev[i].imag()));
  }
  if (max_re <= 1e-9 * scale && max_im > 1e-9 * scale) {
    return 2.0 * std::numbers::pi / max_im;
  }
  return std::nullopt;
}

double orbit_speed(const Mat3& d, const Vec3& x) {
  const Vec3 dx = d * x;
  return (dx - x * x.dot(dx)).norm();
}

}  // namespace

SymmetryGenerator::SymmetryGenerator(Algebra d_, std::string label_)
    : d(std::move(d_)), label(std::move(label_)) {
  if (!(d.norm() > 0.0)) throw InvariantViolation("SymmetryGenerator: zero generator");
}

RasterImage generate_degenerate_image(const SymmetryGenerator& gen,
                                      const DegenerateImageOptions& opts) {
  if (opts.n_seeds < 1) throw ConfigError("n_seeds must be at least 1");
  if (opts.n_steps < 2) throw ConfigError("n_steps must be at least 2");
  if (opts.width <= 0 || opts.height <= 0) throw ConfigError("empty raster size");
  if (!(opts.t_span > 0.0) || !(opts.kernel_px > 0.0)) {
    throw ConfigError("t_span and kernel_px must be positive");
  }
  const Calibration calib =
      opts.calib.value_or(Calibration::default_for(opts.width, opts.height));
  const Mat3& d = gen.d.matrix();
  const double sigma = opts.kernel_px / calib.matrix()(0, 0);  // radians

  // Orbit parameter samples and quadrature weights.
  const auto period = closed_orbit_period(d);
  const double window = period ? *period : 2.0 * opts.t_span;
  double vmax = 0.0;
  for (int v = 0; v < opts.height; v += 4) {
    for (int u = 0; u < opts.width; u += 4) {
      vmax = std::max(vmax, orbit_speed(d, pixel_to_ray(calib, Pixel{double(u), double(v)}).vector()));
    }
  }
  const int needed = static_cast<int>(std::ceil(window * vmax / (0.5 * sigma))) + 1;
  const int n = std::max(opts.n_steps, needed);
  std::vector<double> t(n);
  std::vector<double> w(n);
  if (period) {
    for (int i = 0; i < n; ++i) {
      t[i] = -0.5 * window + window * i / n;
      w[i] = window / n;
    }
  } else {
    const double dt = window / (n - 1);
    for (int i = 0; i < n; ++i) {
      t[i] = -opts.t_span + dt * i;
      w[i] = (i == 0 || i == n - 1) ? 0.5 * dt : dt;
    }
  }
  // rho(exp(t D), x) is the direction of exp(-t D) x.
  std::vector<Mat3> flow(n);
  for (int i = 0; i < n; ++i) flow[i] = (-t[i] * d).exp();

  // Seeds: uniform pixel positions, skipping near-fixed points whose orbits
  // would not be swept within the parameter window.
  std::mt19937_64 rng(opts.rng_seed);
  std::uniform_real_distribution<double> pu(0.0, opts.width - 1.0);
  std::uniform_real_distribution<double> pv(0.0, opts.height - 1.0);
  std::uniform_real_distribution<double> pc(0.0, 1.0);
  std::vector<Seed> seeds;
  const double min_speed = period ? 0.0 : 4.0 * sigma / opts.t_span;
  for (int attempt = 0; attempt < 100 * opts.n_seeds && int(seeds.size()) < opts.n_seeds;
       ++attempt) {
    const Vec3 x = pixel_to_ray(calib, Pixel{pu(rng), pv(rng)}).vector();
    const double c = pc(rng);
    if (orbit_speed(d, x) < min_speed) continue;
    seeds.push_back({x, c});
  }
  if (seeds.empty()) {
    throw EmptyRaster("no seed orbit crosses the raster for generator '" + gen.label + "'");
  }

  const double cutoff = 4.0 * sigma;
  const double margin_px = 5.0 * opts.kernel_px;
  const SeedBuckets buckets(seeds, calib, opts.width, opts.height, margin_px);
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  const double background = 0.5;
  const double eps = 0.1 * std::sqrt(2.0 * std::numbers::pi) * sigma /
                     std::max(vmax, 1e-12);
  const Mat3& k = calib.matrix();

  std::vector<double> data(static_cast<std::size_t>(opts.width) * opts.height);
  for (int v = 0; v < opts.height; ++v) {
    for (int u = 0; u < opts.width; ++u) {
      const Vec3 x = pixel_to_ray(calib, Pixel{double(u), double(v)}).vector();
      double sum_w = 0.0;
      double sum_cw = 0.0;
      for (int i = 0; i < n; ++i) {
        const Vec3 y = flow[i] * x;
        const Vec3 q = k * y;
        if (!(q[2] > 0.0)) continue;
        const double qu = q[0] / q[2];
        const double qv = q[1] / q[2];
        if (qu < -margin_px || qv < -margin_px || qu > opts.width - 1 + margin_px ||
            qv > opts.height - 1 + margin_px) {
          continue;
        }
        const Vec3 yn = y.normalized();
        buckets.for_near(qu, qv, [&](std::size_t s) {
          const double d2 = (yn - seeds[s].ray).squaredNorm();
          if (d2 > cutoff * cutoff) return;
          const double kw = w[i] * std::exp(-d2 * inv_two_sigma2);
          sum_w += kw;
          sum_cw += kw * seeds[s].intensity;
        });
      }
      const double value = (sum_cw + background * eps) / (sum_w + eps);
      data[static_cast<std::size_t>(v) * opts.width + u] = std::clamp(value, 0.0, 1.0);
    }
  }
  return RasterImage(opts.width, opts.height, std::move(data), calib);
}

StabilizerResidual verify_stabilizer(const SphericalImage& image,
                                     const SymmetryGenerator& gen,
                                     const std::vector<double>& t_values,
                                     int n_samples, std::uint64_t rng_seed) {
  const RasterImage& src = image.source();
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> pu(1.0, src.width() - 2.0);
  std::uniform_real_distribution<double> pv(1.0, src.height() - 2.0);

  // Interior rays of the image domain (the pullback maps them to source rays).
  const Mat3 to_query = image.pullback().inverse();
  std::vector<Vec3> rays;
  rays.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const Vec3 src_ray = pixel_to_ray(src.calib(), Pixel{pu(rng), pv(rng)}).vector();
    rays.push_back((to_query * src_ray).normalized());
  }

  StabilizerResidual out;
  double sum = 0.0;
  for (double t : t_values) {
    const Mat3 flow = (-t * gen.d.matrix()).exp();
    for (const Vec3& x : rays) {
      const Vec3 y = t == 0.0 ? x : Vec3((flow * x).normalized());
      if (!image.in_domain_ray(x) || !image.in_domain_ray(y)) continue;
      const double r = std::abs(image.sample_ray(y) - image.sample_ray(x));
      sum += r;
      out.max_abs = std::max(out.max_abs, r);
      ++out.count;
    }
  }
  out.mean_abs = out.count ? sum / static_cast<double>(out.count) : 0.0;
  return out;
}

std::vector<SymmetryGenerator> builtin_generators() {
  const double r2 = 1.0 / std::sqrt(2.0);
  return {
      SymmetryGenerator(basis(5), "rotation about the optical axis (B5)"),
      SymmetryGenerator(basis(1), "anisotropic scaling (B1)"),
      SymmetryGenerator(basis(2), "shear (B2)"),
      SymmetryGenerator(basis(8), "zoom-like scaling (B8)"),
      SymmetryGenerator((basis(5) + basis(8)) * r2, "spiral: rotation + zoom ((B5+B8)/sqrt2)"),
      SymmetryGenerator((basis(3) + basis(6)) * r2,
                        "parabolic translation-like flow ((B3+B6)/sqrt2)"),
  };
}

}  // namespace hobs
