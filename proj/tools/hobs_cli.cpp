// hobs: batch front-end for the homography observer.
//
//   hobs --config sim.cfg simulate
//   hobs --config sim.cfg compare [--variants scalar:0.01,dual_gain:0.01:0.02]
//   hobs gen-degenerate --builtin 0 -o rot.pgm
//   hobs check-observability image.pgm
//
// Exit codes: 0 success, 1 usage or configuration error, 2 I/O error,
// 3 numerical error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "hobs/config.hpp"
#include "hobs/degeneracy.hpp"
#include "hobs/simulation.hpp"

namespace {

using namespace hobs;

struct GlobalOptions {
  std::string config_path;
  std::string output_dir;
  std::optional<bool> deterministic;
  std::string quadrature;
  bool dump_config = false;
};

SimulationConfig effective_config(const GlobalOptions& g) {
  if (g.config_path.empty()) throw ConfigError("--config is required for this command");
  std::vector<std::string> log;
  SimulationConfig cfg = load_config(g.config_path, &log);
  for (const auto& line : log) std::cerr << "note: " << line << "\n";
  if (!g.output_dir.empty()) cfg.output_dir = g.output_dir;
  if (g.deterministic) cfg.deterministic = *g.deterministic;
  if (!g.quadrature.empty()) cfg.quadrature = parse_quadrature(g.quadrature);
  return cfg;
}

void print_final(const std::string& label, const SimulationResult& r) {
  const auto& last = r.rows.back();
  std::printf("%s: t=%.3f eps_h=%.6e (initial %.6e) eps_i=%.6e cost=%.6e\n",
              label.c_str(), last.t, last.eps_h, r.rows.front().eps_h, last.eps_i,
              last.cost);
}

std::vector<double> parse_vector(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("invalid number '" + item + "' in '" + text + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct homography observer on SL(3)"};
  app.require_subcommand(0, 1);
  GlobalOptions g;
  app.add_option("--config", g.config_path, "simulation config file");
  app.add_option("--output-dir", g.output_dir, "override [output] dir");
  app.add_flag("--deterministic,!--no-deterministic", g.deterministic,
               "sequential, bit-reproducible pixel sums");
  app.add_option("--quadrature", g.quadrature, "solid_angle or uniform")
      ->check(CLI::IsMember({"solid_angle", "uniform"}));
  app.add_flag("--dump-config", g.dump_config,
               "print the effective configuration and exit");

  auto* sim = app.add_subcommand("simulate", "run one observer simulation");

  auto* cmp = app.add_subcommand("compare", "run several gain variants");
  std::string variants;
  cmp->add_option("--variants", variants,
                  "comma-separated gains (default: [compare] variants)");

  auto* gen = app.add_subcommand("gen-degenerate", "synthesise an unobservable image");
  std::optional<int> builtin;
  std::string custom;
  std::string gen_output;
  DegenerateImageOptions gen_opts;
  bool list = false;
  gen->add_option("--builtin", builtin, "builtin generator index (0-5)");
  gen->add_option("--custom", custom, "generator coordinates c1,...,c8");
  gen->add_flag("--list", list, "list the builtin generators");
  gen->add_option("-o,--output", gen_output, "output image (.pgm or .png)");
  gen->add_option("--width", gen_opts.width)->check(CLI::PositiveNumber);
  gen->add_option("--height", gen_opts.height)->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_opts.rng_seed);
  gen->add_option("--n-seeds", gen_opts.n_seeds)->check(CLI::PositiveNumber);
  gen->add_option("--kernel-px", gen_opts.kernel_px)->check(CLI::PositiveNumber);
  gen->add_option("--t-span", gen_opts.t_span)->check(CLI::PositiveNumber);

  auto* obs = app.add_subcommand("check-observability", "Hessian spectrum of an image");
  std::string obs_image;
  std::optional<double> obs_focal;
  double threshold = kDegeneracyRatio;
  obs->add_option("image", obs_image, "grayscale PGM or PNG")->required();
  obs->add_option("--focal", obs_focal, "focal length in pixels (default: width)")
      ->check(CLI::PositiveNumber);
  obs->add_option("--threshold", threshold, "degeneracy threshold on min_ratio")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (g.dump_config) {
      std::cout << dump_config(effective_config(g));
      return 0;
    }
    if (sim->parsed()) {
      const SimulationConfig cfg = effective_config(g);
      print_final(cfg.gain.to_string(), simulate(cfg));
      std::printf("wrote %s\n", (cfg.output_dir / "errors.csv").string().c_str());
    } else if (cmp->parsed()) {
      const SimulationConfig cfg = effective_config(g);
      std::vector<GainConfig> gains = cfg.compare_variants;
      if (!variants.empty()) {
        gains.clear();
        std::stringstream ss(variants);
        std::string item;
        while (std::getline(ss, item, ',')) gains.push_back(GainConfig::parse(item));
      }
      const auto results = compare(cfg, gains);
      for (std::size_t i = 0; i < results.size(); ++i) {
        print_final(gains[i].to_string(), results[i]);
      }
      std::printf("wrote %s\n", (cfg.output_dir / "compare.csv").string().c_str());
    } else if (gen->parsed()) {
      const auto gens = builtin_generators();
      if (list) {
        for (std::size_t i = 0; i < gens.size(); ++i) {
          std::printf("%zu  %s\n", i, gens[i].label.c_str());
        }
        return 0;
      }
      if (builtin.has_value() == !custom.empty()) {
        throw ConfigError("give exactly one of --builtin or --custom");
      }
      if (gen_output.empty()) throw ConfigError("--output is required");
      std::optional<SymmetryGenerator> chosen;
      if (builtin) {
        if (*builtin < 0 || *builtin >= static_cast<int>(gens.size())) {
          throw ConfigError("--builtin must be between 0 and " +
                            std::to_string(gens.size() - 1));
        }
        chosen = gens[*builtin];
      } else {
        const auto c = parse_vector(custom);
        if (c.size() != 8) throw ConfigError("--custom needs exactly 8 coordinates");
        chosen = SymmetryGenerator(wedge<double>(Coords8(c.data())), "custom");
      }
      save_image(generate_degenerate_image(*chosen, gen_opts), gen_output);
      std::printf("wrote %s (%s)\n", gen_output.c_str(), chosen->label.c_str());
    } else if (obs->parsed()) {
      RasterImage img = load_image(obs_image);
      if (obs_focal) {
        img = RasterImage(img.width(), img.height(), img.data(),
                          Calibration::pinhole(*obs_focal, *obs_focal,
                                               (img.width() - 1) / 2.0,
                                               (img.height() - 1) / 2.0));
      }
      const Quadrature q = g.quadrature.empty() ? Quadrature::SolidAngle
                                                : parse_quadrature(g.quadrature);
      const ObservabilityReport report = check_nondegeneracy(
          SphericalImage(img), build_pixel_grid(img, q), EvalOptions{true}, threshold);
      std::cout << format_report(report);
    } else {
      std::cerr << app.help();
      return 1;
    }
  } catch (const Error& e) {
    std::cerr << "hobs: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "hobs: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
