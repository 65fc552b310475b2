#pragma once

// Direct (intensity-based) homography observer on SL(3).
//
// Kinematics      H' = H U
// Observer        Hhat' = Hhat U + Delta Hhat
// Error           E = Hhat H^{-1},   E' = Delta E
//
// The correction Delta is built from the photometric cost
//   C(Hhat) = 1/2 sum_i (I^e(x_i) - Iref(x_i))^2 w_i,   I^e = mu(Hhat^{-1}, I)
// whose negative gradient on sl(3) is the integral
//   M = sum_i r(x_i) grad I^e(x_i) x_i^T w_i,           r = I^e - Iref.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hobs/image.hpp"
#include "hobs/sl3.hpp"

namespace hobs {

struct ScalarGain {
  double k_delta = 0.01;
};

/// K = k_delta (Hess + ridge * lambda_max * I)^{-1}. `ridge` is relative to
/// the largest Hessian eigenvalue.
struct InverseHessianGain {
  double k_delta = 0.01;
  double ridge = 1e-8;
};

struct DualGain {
  double k_s = 0.01;
  double k_a = 0.02;
};

class GainConfig {
 public:
  using Variant = std::variant<ScalarGain, InverseHessianGain, DualGain>;

  GainConfig() : GainConfig(ScalarGain{}) {}
  GainConfig(ScalarGain g);
  GainConfig(InverseHessianGain g);
  GainConfig(DualGain g);

  const Variant& variant() const { return v_; }
  /// "scalar", "inverse_hessian" or "dual_gain".
  std::string kind() const;
  /// Compact spec string, e.g. "scalar:0.01", "inverse_hessian:0.01:1e-08",
  /// "dual_gain:0.01:0.02". Parsed back by parse().
  std::string to_string() const;
  static GainConfig parse(const std::string& spec);

 private:
  Variant v_;
};

struct ObserverState {
  Group h_hat;
  double t = 0.0;
  GainConfig gains;
  Algebra last_delta;  // diagnostics: correction used by the latest step
};

struct TruthState {
  Group h;
  Algebra velocity;
};

struct ErrorReport {
  double t = 0.0;
  double eps_h = 0.0;
  double eps_i = 0.0;
  double cost = 0.0;
};

/// Evaluation settings shared by the quadrature loops.
struct EvalOptions {
  /// Sequential summation in pixel order. When false, the pixel sums may be
  /// split over worker threads.
  bool deterministic = true;
};

/// I^e = mu(Hhat^{-1}, I) = I o rho_Hhat
SphericalImage warped_error_image(const Group& h_hat, const SphericalImage& image);

double photometric_cost(const Group& h_hat, const SphericalImage& image,
                        const SphericalImage& ref, const PixelGrid& grid,
                        EvalOptions opts = {});

/// Unscaled correction integral M (traceless up to rounding).
Mat3 correction_integral(const Group& h_hat, const SphericalImage& image,
                         const SphericalImage& ref, const PixelGrid& grid,
                         EvalOptions opts = {});

/// 8x8 Hessian of the cost at E = I: sum_i v_i v_i^T w_i,
/// v_i = vee(grad Iref(x_i) x_i^T).
Mat8 cost_hessian(const SphericalImage& ref, const PixelGrid& grid,
                  EvalOptions opts = {});

Algebra correction_scalar(const Group& h_hat, const SphericalImage& image,
                          const SphericalImage& ref, const PixelGrid& grid,
                          double k_delta, EvalOptions opts = {});

Algebra correction_inverse_hessian(const Group& h_hat, const SphericalImage& image,
                                   const SphericalImage& ref, const PixelGrid& grid,
                                   double k_delta, double ridge,
                                   EvalOptions opts = {});

Algebra correction_dual_gain(const Group& h_hat, const SphericalImage& image,
                             const SphericalImage& ref, const PixelGrid& grid,
                             double k_s, double k_a, EvalOptions opts = {});

// Gain laws applied to a precomputed integral M.
Algebra apply_scalar_gain(const Mat3& m, double k_delta);
Algebra apply_dual_gain(const Mat3& m, double k_s, double k_a);
/// Throws SingularHessian when ridge == 0 and lambda_min <= 1e-10 lambda_max.
Algebra apply_inverse_hessian_gain(const Mat3& m, const Mat8& hessian,
                                   double k_delta, double ridge);

/// Reference image, its pixel grid and the lazily cached Hessian. One
/// context per simulation run.
class CorrectionContext {
 public:
  CorrectionContext(SphericalImage ref, PixelGrid grid, EvalOptions opts = {});

  const SphericalImage& ref() const { return ref_; }
  const PixelGrid& grid() const { return grid_; }
  EvalOptions options() const { return opts_; }

  /// Hessian at the identity; computed on first use.
  const Mat8& hessian() const;

  Algebra correction(const GainConfig& gains, const Group& h_hat,
                     const SphericalImage& image) const;

 private:
  SphericalImage ref_;
  PixelGrid grid_;
  EvalOptions opts_;
  mutable std::optional<Mat8> hessian_;
};

/// One discrete observer step:
///   Hhat+ = project(exp(dt Delta) Hhat exp(dt U)),  t+ = t + dt.
ObserverState step(const ObserverState& state, const Algebra& velocity,
                   const SphericalImage& image, const CorrectionContext& ctx,
                   double dt);

/// Hhat+ = project(exp(dt Delta) Hhat exp(dt U)) with a given Delta.
ObserverState advance(const ObserverState& state, const Algebra& delta,
                      const Algebra& velocity, double dt);

/// Open-loop variant of step() with Delta = 0.
ObserverState step_open_loop(const ObserverState& state, const Algebra& velocity,
                             double dt);

/// H+ = project(H exp(dt U))
TruthState propagate_truth(const TruthState& truth, double dt);

/// eps_h = |I - Hhat H^{-1}|_F^2, eps_i = (1/N) sum_i r_i^2 (per pixel, no
/// quadrature weights), cost with the grid weights.
ErrorReport error_metrics(const TruthState& truth, const ObserverState& state,
                          const SphericalImage& image, const SphericalImage& ref,
                          const PixelGrid& grid, EvalOptions opts = {});

struct ObservabilityReport {
  std::vector<double> eigenvalues;  // descending
  double min_ratio = 0.0;           // lambda_min / lambda_max (0 if all zero)
  bool observable = false;
  std::vector<Coords8> null_directions;  // unit eigenvectors below threshold
};

/// Default verdict threshold on lambda_min / lambda_max. 8-bit storage of an
/// exactly symmetric image already lifts the ratio to about 1e-4.
inline constexpr double kDegeneracyRatio = 1e-3;

ObservabilityReport check_nondegeneracy(const SphericalImage& ref,
                                        const PixelGrid& grid,
                                        EvalOptions opts = {},
                                        double threshold = kDegeneracyRatio);
/// Same report from an already computed Hessian.
ObservabilityReport analyse_hessian(const Mat8& hessian,
                                    double threshold = kDegeneracyRatio);

}  // namespace hobs
