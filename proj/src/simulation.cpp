#include "hobs/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace hobs {
namespace {

std::string snapshot_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t%.3f", t);
  return buf;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

}  // namespace

RasterImage load_reference(const SimulationConfig& config) {
  const RasterImage raw = load_image(config.reference_image);
  return RasterImage(raw.width(), raw.height(), raw.data(),
                     config.calibration(raw.width(), raw.height()));
}

RasterImage rasterize(const SphericalImage& image, const RasterImage& like) {
  std::vector<double> data(like.size());
  for (int v = 0; v < like.height(); ++v) {
    for (int u = 0; u < like.width(); ++u) {
      const Vec3 x = pixel_to_ray(like.calib(), Pixel{double(u), double(v)}).vector();
      data[static_cast<std::size_t>(v) * like.width() + u] =
          std::clamp(image.sample_ray(x), 0.0, 1.0);
    }
  }
  return RasterImage(like.width(), like.height(), std::move(data), like.calib());
}

RasterImage difference_image(const RasterImage& a, const RasterImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ConfigError("difference_image: size mismatch");
  }
  std::vector<double> diff(a.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = std::abs(a.data()[i] - b.data()[i]);
    peak = std::max(peak, diff[i]);
  }
  if (peak > 0.0) {
    for (double& d : diff) d /= peak;
  }
  return RasterImage(a.width(), a.height(), std::move(diff), a.calib());
}

SimulationResult run_simulation(const SimulationConfig& config,
                                const RasterImage& reference,
                                const RunOptions& options) {
  config.validate();
  const EvalOptions eval{config.deterministic};
  const SphericalImage ref(reference);
  const CorrectionContext ctx(ref, build_pixel_grid(reference, config.quadrature), eval);
  const int n = static_cast<int>(std::lround(config.duration / config.dt));

  std::vector<int> snapshot_steps;
  for (double ts : config.snapshot_times) {
    const long k = std::lround(ts / config.dt);
    if (ts >= 0.0 && k <= n) snapshot_steps.push_back(static_cast<int>(k));
  }
  if (options.snapshot_dir) ensure_dir(*options.snapshot_dir);

  TruthState truth{config.h0, config.velocity_at(0.0)};
  ObserverState state{config.h_hat0, 0.0, config.gain, Algebra::Zero()};
  SimulationResult result;
  result.rows.reserve(n + 1);
  result.det_h_hat.reserve(n);

  for (int k = 0; k <= n; ++k) {
    const double t = k * config.dt;
    state.t = t;
    truth.velocity = config.velocity_at(t);
    const SphericalImage current = ref.warp(truth.h);
    const Algebra delta = options.open_loop
                              ? Algebra::Zero()
                              : ctx.correction(state.gains, state.h_hat, current);
    const ErrorReport err = error_metrics(truth, state, current, ref, ctx.grid(), eval);
    result.rows.push_back({t, err.eps_h, err.eps_i, err.cost, delta.norm()});

    if (options.snapshot_dir &&
        std::find(snapshot_steps.begin(), snapshot_steps.end(), k) != snapshot_steps.end()) {
      const RasterImage warped =
          rasterize(warped_error_image(state.h_hat, current), reference);
      const std::string tag = snapshot_tag(t);
      save_image(warped, *options.snapshot_dir / ("warped_" + tag + ".png"));
      save_image(difference_image(warped, reference),
                 *options.snapshot_dir / ("diff_" + tag + ".png"));
    }
    if (k == n) break;
    state = advance(state, delta, truth.velocity, config.dt);
    truth = propagate_truth(truth, config.dt);
    result.det_h_hat.push_back(state.h_hat.matrix().determinant());
  }
  result.h_final = truth.h;
  result.h_hat_final = state.h_hat;
  return result;
}

std::string format_csv(const std::vector<SimulationRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += format_double(r.t) + ',' + format_double(r.eps_h) + ',' +
           format_double(r.eps_i) + ',' + format_double(r.cost) + ',' +
           format_double(r.delta_norm) + '\n';
  }
  return out;
}

void write_csv(const std::vector<SimulationRow>& rows, const std::filesystem::path& path) {
  write_text(format_csv(rows), path);
}

std::string format_report(const ObservabilityReport& report) {
  std::ostringstream os;
  char buf[64];
  os << "eigenvalues:\n";
  for (double e : report.eigenvalues) {
    std::snprintf(buf, sizeof buf, "%.16e", e);
    os << buf << "\n";
  }
  std::snprintf(buf, sizeof buf, "%.16e", report.min_ratio);
  os << "min_ratio: " << buf << "\n";
  os << "verdict: " << (report.observable ? "observable" : "degenerate") << "\n";
  os << "null_directions: " << report.null_directions.size() << "\n";
  for (const auto& d : report.null_directions) {
    for (int i = 0; i < 8; ++i) {
      std::snprintf(buf, sizeof buf, "%s% .6f", i ? " " : "", d[i]);
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

SimulationResult simulate(const SimulationConfig& config) {
  const RasterImage reference = load_reference(config);
  ensure_dir(config.output_dir);
  RunOptions options;
  options.snapshot_dir = config.output_dir;
  SimulationResult result = run_simulation(config, reference, options);
  write_csv(result.rows, config.output_dir / "errors.csv");
  return result;
}

std::vector<SimulationResult> compare(const SimulationConfig& config,
                                      const std::vector<GainConfig>& variants) {
  if (variants.empty()) throw ConfigError("compare: no gain variants given");
  const RasterImage reference = load_reference(config);
  ensure_dir(config.output_dir);

  std::vector<SimulationResult> results;
  std::vector<std::string> labels;
  std::map<std::string, int> used;
  for (const auto& gain : variants) {
    std::string label = gain.kind();
    if (const int seen = used[label]++) label += "_" + std::to_string(seen + 1);
    SimulationConfig cfg = config;
    cfg.gain = gain;
    cfg.output_dir = config.output_dir / label;
    RunOptions options;
    options.snapshot_dir = cfg.output_dir;
    results.push_back(run_simulation(cfg, reference, options));
    write_csv(results.back().rows, cfg.output_dir / "errors.csv");
    labels.push_back(label);
  }

  std::ostringstream os;
  os << "t";
  for (const auto& l : labels) {
    os << ",eps_h_" << l << ",eps_i_" << l << ",cost_" << l << ",delta_norm_" << l;
  }
  os << "\n";
  for (std::size_t i = 0; i < results.front().rows.size(); ++i) {
    os << format_double(results.front().rows[i].t);
    for (const auto& r : results) {
      const auto& row = r.rows[i];
      os << ',' << format_double(row.eps_h) << ',' << format_double(row.eps_i) << ','
         << format_double(row.cost) << ',' << format_double(row.delta_norm);
    }
    os << "\n";
  }
  write_text(os.str(), config.output_dir / "compare.csv");
  return results;
}

}  // namespace hobs
