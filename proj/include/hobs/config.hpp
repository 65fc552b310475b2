#pragma once

// Simulation configuration: a line-oriented `key = value` file with
// `[section]` headers and `#` comments.
//
//   [reference]   image, focal, cu, cv
//   [truth]       h0, u, u_schedule
//   [observer]    h_hat0, gain
//   [integration] dt, duration
//   [output]      dir, quadrature, snapshot_times, deterministic
//   [compare]     variants
//
// Matrices are written row by row: `a b c; d e f; g h i`. Gains use the
// GainConfig spec strings (scalar:k, inverse_hessian:k[:ridge],
// dual_gain:k_s:k_a). Relative paths resolve against the config file.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hobs/image.hpp"
#include "hobs/observer.hpp"
#include "hobs/sl3.hpp"

namespace hobs {

struct VelocitySegment {
  double t_start = 0.0;
  Algebra u;
};

struct SimulationConfig {
  std::filesystem::path reference_image;
  // Calibration overrides; unset values fall back to the default pinhole.
  std::optional<double> focal;
  std::optional<double> cu;
  std::optional<double> cv;

  Group h0;
  /// Piecewise-constant velocity; the first segment starts at t = 0.
  std::vector<VelocitySegment> velocity{VelocitySegment{}};
  Group h_hat0;
  GainConfig gain;
  double dt = 0.01;
  double duration = 3.0;
  Quadrature quadrature = Quadrature::SolidAngle;
  std::vector<double> snapshot_times{0.0, 0.15, 1.0};
  std::filesystem::path output_dir = "out";
  bool deterministic = true;
  std::vector<GainConfig> compare_variants;

  /// Velocity active at time t.
  const Algebra& velocity_at(double t) const;
  /// Calibration for a raster of the given size.
  Calibration calibration(int width, int height) const;
  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

/// Parses config text. `base_dir` anchors relative paths. `log` (optional)
/// receives notes such as the SL(3) projection applied to h0.
SimulationConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir = {},
                              std::vector<std::string>* log = nullptr);
SimulationConfig load_config(const std::filesystem::path& path,
                             std::vector<std::string>* log = nullptr);
/// Serialises every field; parse_config(dump_config(c)) reproduces c.
std::string dump_config(const SimulationConfig& config);

/// "a b c; d e f; g h i"
Mat3 parse_matrix(const std::string& text);
std::string format_matrix(const Mat3& m);

/// Round-trip decimal representation (17 significant digits).
std::string format_double(double v);

}  // namespace hobs
