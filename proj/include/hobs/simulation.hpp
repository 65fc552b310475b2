#pragma once

// Simulation harness: truth propagation, observer stepping, error logs and
// image snapshots.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hobs/config.hpp"
#include "hobs/image.hpp"
#include "hobs/observer.hpp"

namespace hobs {

struct SimulationRow {
  double t = 0.0;
  double eps_h = 0.0;
  double eps_i = 0.0;
  double cost = 0.0;
  double delta_norm = 0.0;  // |Delta|_F of the correction applied at t
};

struct SimulationResult {
  std::vector<SimulationRow> rows;  // steps 0..n
  std::vector<double> det_h_hat;    // det(Hhat) after every step 1..n
  Group h_final;
  Group h_hat_final;
};

struct RunOptions {
  /// Writes snapshot images here when set.
  std::optional<std::filesystem::path> snapshot_dir;
  /// Disables the correction (Delta = 0).
  bool open_loop = false;
};

inline const char* kCsvHeader = "t,eps_h,eps_i,cost,delta_norm";

/// Reference raster with the configured calibration applied.
RasterImage load_reference(const SimulationConfig& config);

/// Runs round(duration / dt) steps. The current image at step k is the
/// reference warped by the true homography, I = mu(H_k, Iref).
SimulationResult run_simulation(const SimulationConfig& config,
                                const RasterImage& reference,
                                const RunOptions& options = {});

void write_csv(const std::vector<SimulationRow>& rows,
               const std::filesystem::path& path);
std::string format_csv(const std::vector<SimulationRow>& rows);

/// Samples a spherical image on the pixel rays of `like`.
RasterImage rasterize(const SphericalImage& image, const RasterImage& like);
/// |a - b| linearly stretched so that the largest difference maps to 1.
RasterImage difference_image(const RasterImage& a, const RasterImage& b);

/// Text form of an observability report: one eigenvalue per line in
/// descending order (scientific notation), then min_ratio, the verdict and
/// any null directions as 8-vectors.
std::string format_report(const ObservabilityReport& report);

/// Writes errors.csv and snapshots under config.output_dir.
SimulationResult simulate(const SimulationConfig& config);

/// Runs every variant into output_dir/<kind>/ and writes output_dir/compare.csv
/// with columns t, then eps_h_<kind>, eps_i_<kind>, cost_<kind>,
/// delta_norm_<kind> per variant.
std::vector<SimulationResult> compare(const SimulationConfig& config,
                                      const std::vector<GainConfig>& variants);

}  // namespace hobs
