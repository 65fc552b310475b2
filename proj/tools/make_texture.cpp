// Writes the procedural reference texture shipped as data/reference.pgm:
// multi-octave value noise with a few soft-edged blobs and streaks.
//
//   make_texture [output] [--width W] [--height H] [--seed S]

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <vector>

#include "hobs/errors.hpp"
#include "hobs/image.hpp"

namespace {

class ValueNoise {
 public:
  ValueNoise(int cells, std::mt19937_64& rng) : n_(cells + 1), grid_(n_ * n_) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (double& g : grid_) g = d(rng);
  }

  // (x, y) in [0, 1]^2
  double operator()(double x, double y) const {
    const double gx = x * (n_ - 1);
    const double gy = y * (n_ - 1);
    const int ix = std::min(static_cast<int>(gx), n_ - 2);
    const int iy = std::min(static_cast<int>(gy), n_ - 2);
    const double fx = smooth(gx - ix);
    const double fy = smooth(gy - iy);
    const double a = at(ix, iy) + fx * (at(ix + 1, iy) - at(ix, iy));
    const double b = at(ix, iy + 1) + fx * (at(ix + 1, iy + 1) - at(ix, iy + 1));
    return a + fy * (b - a);
  }

 private:
  static double smooth(double t) { return t * t * t * (t * (6.0 * t - 15.0) + 10.0); }
  double at(int x, int y) const { return grid_[static_cast<std::size_t>(y) * n_ + x]; }

  int n_;
  std::vector<double> grid_;
};

struct Blob {
  double cx, cy, rx, ry, angle, amplitude;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Procedural reference texture"};
  std::string output = "reference.pgm";
  int width = 256;
  int height = 254;
  std::uint64_t seed = 2024;
  double border = 24.0;
  app.add_option("output", output, "output image (.pgm or .png)");
  app.add_option("--width", width)->check(CLI::PositiveNumber);
  app.add_option("--height", height)->check(CLI::PositiveNumber);
  app.add_option("--seed", seed);
  app.add_option("--border", border, "taper width in pixels")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  std::mt19937_64 rng(seed);
  std::vector<ValueNoise> octaves;
  for (int cells : {2, 4, 8, 16}) octaves.emplace_back(cells, rng);
  const double amp[] = {0.5, 0.3, 0.15, 0.06};

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Blob> blobs;
  for (int i = 0; i < 10; ++i) {
    blobs.push_back({unit(rng), unit(rng), 0.06 + 0.12 * unit(rng), 0.04 + 0.08 * unit(rng),
                     M_PI * unit(rng), unit(rng) < 0.5 ? -0.35 : 0.35});
  }

  // Raised-cosine taper to zero over the outer `border` pixels.
  auto taper = [&](double p, int n) {
    const double d = std::min(p, n - 1.0 - p) / border;
    return d >= 1.0 ? 1.0 : 0.5 - 0.5 * std::cos(M_PI * std::max(d, 0.0));
  };

  std::vector<double> data(static_cast<std::size_t>(width) * height);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const double x = (u + 0.5) / width;
      const double y = (v + 0.5) / height;
      double value = 0.0;
      for (std::size_t o = 0; o < octaves.size(); ++o) value += amp[o] * octaves[o](x, y);
      for (const auto& b : blobs) {
        const double c = std::cos(b.angle);
        const double s = std::sin(b.angle);
        const double dx = ((x - b.cx) * c + (y - b.cy) * s) / b.rx;
        const double dy = (-(x - b.cx) * s + (y - b.cy) * c) / b.ry;
        const double r2 = dx * dx + dy * dy;
        value += b.amplitude / (1.0 + std::exp(3.0 * (r2 - 1.0)));
      }
      data[static_cast<std::size_t>(v) * width + u] =
          taper(u, width) * taper(v, height) * std::clamp(0.5 + 0.5 * value, 0.0, 1.0);
    }
  }

  try {
    const hobs::RasterImage img(width, height, std::move(data),
                                hobs::Calibration::default_for(width, height));
    hobs::save_image(img, output);
  } catch (const hobs::Error& e) {
    std::cerr << "make_texture: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  }
  return 0;
}
