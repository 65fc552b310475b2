#pragma once

// Synthesis of reference images that are invariant under a one-parameter
// subgroup {exp(t D)} of SL(3), i.e. unobservable configurations for the
// photometric observer, and a residual check of that invariance.

#include <cstdint>
#include <string>
#include <vector>

#include "hobs/image.hpp"
#include "hobs/sl3.hpp"

namespace hobs {

struct SymmetryGenerator {
  SymmetryGenerator(Algebra d, std::string label);

  Algebra d;
  std::string label;
};

struct DegenerateImageOptions {
  int width = 256;
  int height = 254;
  /// Defaults to Calibration::default_for(width, height) when unset.
  std::optional<Calibration> calib;
  int n_seeds = 80;
  /// Minimum number of orbit samples per pixel; refined automatically so that
  /// consecutive samples stay within half a kernel width.
  int n_steps = 256;
  /// Orbit parameter range [-t_span, t_span]. Elliptic generators (closed
  /// orbits) always integrate over exactly one period instead.
  double t_span = 10.0;
  /// Width of the seed kernel, in pixels at the principal point.
  double kernel_px = 4.0;
  std::uint64_t rng_seed = 42;
};

/// Each seed x_k carries a random intensity c_k. The intensity at x is the
/// average of the c_k weighted by the time the orbit of x spends near each
/// seed,
///   I(x) = (sum_k c_k W_k(x) + b eps) / (sum_k W_k(x) + eps),
///   W_k(x) = int kappa(rho(exp(t D), x), x_k) dt,
/// so every point of an orbit receives the same value. Pixels whose orbits
/// meet no seed take the background b = 1/2.
RasterImage generate_degenerate_image(const SymmetryGenerator& gen,
                                      const DegenerateImageOptions& opts = {});

struct StabilizerResidual {
  double mean_abs = 0.0;
  double max_abs = 0.0;
  std::size_t count = 0;  // sample pairs with both points in the domain
};

/// Mean and max of |I(rho(exp(t D), x)) - I(x)| over random interior rays x
/// and the given t values.
StabilizerResidual verify_stabilizer(const SphericalImage& image,
                                     const SymmetryGenerator& gen,
                                     const std::vector<double>& t_values,
                                     int n_samples = 2000,
                                     std::uint64_t rng_seed = 42);

/// Six unit-norm generators of distinct subgroup types:
///   0 rotation about the optical axis      B5
///   1 anisotropic scaling                   B1
///   2 shear                                 B2
///   3 zoom-like scaling                     B8
///   4 spiral (rotation + zoom)              (B5 + B8) / sqrt(2)
///   5 parabolic, translation-like           (B3 + B6) / sqrt(2) = e1 e3^T
std::vector<SymmetryGenerator> builtin_generators();

}  // namespace hobs
