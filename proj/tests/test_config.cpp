#include <doctest.h>

#include <fstream>
#include <sstream>

#include "hobs/config.hpp"
#include "hobs/simulation.hpp"
#include "support.hpp"

using namespace hobs;

namespace {

const char* kPaperConfig = R"(
[reference]
image = scene.pgm   # relative to the config file

[truth]
h0 = 1.031 0.051 0.087; -0.051 1.031 -0.144; 0 0 0.939
u = 0 0 -0.1; 0 0 0.1; 0 0 0

[observer]
gain = dual_gain:0.01:0.02

[integration]
dt = 0.01
duration = 3
)";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("matrix text") {
  const Mat3 m = parse_matrix("1 2 3; 4 5 6; 7 8 9.5");
  CHECK(m(2, 2) == 9.5);
  CHECK(m(1, 0) == 4.0);
  CHECK((parse_matrix(format_matrix(m)) - m).norm() == 0.0);
  CHECK_THROWS_AS(parse_matrix("1 2 3; 4 5 6"), ConfigError);
  CHECK_THROWS_AS(parse_matrix("1 2; 4 5 6; 7 8 9"), ConfigError);
  CHECK_THROWS_AS(parse_matrix("1 2 x; 4 5 6; 7 8 9"), ConfigError);
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("shipped simulation configuration parses and projects h0") {
  std::vector<std::string> log;
  const SimulationConfig cfg = parse_config(kPaperConfig, "/data/runs", &log);
  CHECK(cfg.reference_image == std::filesystem::path("/data/runs/scene.pgm"));
  CHECK(std::abs(cfg.h0.determinant() - 1.0) < 1e-14);
  Mat3 printed;
  printed << 1.031, 0.051, 0.087, -0.051, 1.031, -0.144, 0, 0, 0.939;
  CHECK((cfg.h0.matrix() - printed / std::cbrt(printed.determinant())).norm() < 1e-15);
  REQUIRE(log.size() == 1);
  CHECK(log[0].find("h0") != std::string::npos);
  CHECK(cfg.gain.to_string() == "dual_gain:0.01:0.02");
  CHECK((cfg.h_hat0.matrix() - Mat3::Identity()).norm() == 0.0);
  CHECK(cfg.quadrature == Quadrature::SolidAngle);
  CHECK(cfg.snapshot_times == std::vector<double>{0.0, 0.15, 1.0});
  CHECK(cfg.deterministic);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("[reference]\nimage = a.pgm\n[integration]\ndt = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[reference]\nimage = a.pgm\n[integration]\ndt = 0.1\nduration = 0.05\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("[integration]\ndt = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[reference]\nimage = a.pgm\ncolour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[reference]\nimage = a.pgm\nimage = b.pgm\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[reference\nimage = a.pgm\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[reference]\nimage a.pgm\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[reference]\nimage = a.pgm\n[truth]\nu = 1 0 0; 0 0 0; 0 0 0\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("[reference]\nimage = a.pgm\n[truth]\nh0 = 0 0 0; 0 0 0; 0 0 0\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("[reference]\nimage = a.pgm\n[truth]\nh0 = -1 0 0; 0 1 0; 0 0 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/dir/x.cfg"), IoError);
}

TEST_CASE("velocity schedule") {
  const SimulationConfig cfg = parse_config(
      "[reference]\nimage = a.pgm\n[truth]\nu = 0 1 0; -1 0 0; 0 0 0\n"
      "u_schedule = 1: 0 0 0; 0 0 0; 0 0 0 | 2.5: 1 0 0; 0 -1 0; 0 0 0\n");
  REQUIRE(cfg.velocity.size() == 3);
  CHECK(cfg.velocity_at(0.0).matrix()(0, 1) == 1.0);
  CHECK(cfg.velocity_at(0.99).matrix()(0, 1) == 1.0);
  CHECK(cfg.velocity_at(1.0).norm() == 0.0);
  CHECK(cfg.velocity_at(3.0).matrix()(0, 0) == 1.0);
  CHECK_THROWS_AS(parse_config("[reference]\nimage = a.pgm\n[truth]\nu_schedule = 2: 0 0 0; 0 0 0; 0 0 0 | "
                               "1: 0 0 0; 0 0 0; 0 0 0\n"),
                  ConfigError);
}

TEST_CASE("dump_config round trip") {
  SimulationConfig cfg = parse_config(kPaperConfig, "/data/runs");
  cfg.focal = 300.5;
  cfg.cv = 120.25;
  cfg.quadrature = Quadrature::Uniform;
  cfg.snapshot_times = {0.0, 0.5};
  cfg.deterministic = false;
  cfg.compare_variants = {GainConfig::parse("scalar:0.01"), GainConfig::parse("inverse_hessian:0.01:0")};
  cfg.velocity.push_back({1.5, Algebra(basis(2).matrix() * 0.1)});

  const std::string text = dump_config(cfg);
  std::vector<std::string> log;
  const SimulationConfig back = parse_config(text, {}, &log);
  CHECK(log.empty());  // already on SL(3) to the last bit
  CHECK(dump_config(back) == text);
  CHECK(back.reference_image == cfg.reference_image);
  CHECK(*back.focal == 300.5);
  CHECK_FALSE(back.cu.has_value());
  CHECK((back.h0.matrix() - cfg.h0.matrix()).norm() == 0.0);
  CHECK(back.velocity.size() == 2);
  CHECK(back.compare_variants.size() == 2);
  CHECK_FALSE(back.deterministic);
}

TEST_CASE("calibration overrides") {
  SimulationConfig cfg;
  const Calibration d = cfg.calibration(256, 254);
  CHECK(d.matrix()(0, 0) == 256.0);
  CHECK(d.matrix()(1, 2) == 126.5);
  cfg.focal = 500.0;
  cfg.cu = 100.0;
  CHECK(cfg.calibration(256, 254).matrix()(1, 1) == 500.0);
  CHECK(cfg.calibration(256, 254).matrix()(0, 2) == 100.0);
}

TEST_CASE("simulation without motion stays converged") {
  const auto dir = test::scratch_dir("sim_idle");
  save_image(test::smooth_image(64, 64), dir / "scene.pgm");
  SimulationConfig cfg;
  cfg.reference_image = dir / "scene.pgm";
  cfg.duration = 0.2;
  cfg.output_dir = dir / "out";
  for (const char* gain : {"scalar:0.5", "inverse_hessian:0.5", "dual_gain:0.5:1"}) {
    cfg.gain = GainConfig::parse(gain);
    const SimulationResult r = simulate(cfg);
    REQUIRE(r.rows.size() == 21);
    for (const auto& row : r.rows) {
      CHECK(row.eps_h <= 1e-12);
      CHECK(row.cost == 0.0);
    }
  }
  const std::string csv = slurp(dir / "out" / "errors.csv");
  CHECK(csv.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 22);
  CHECK(std::filesystem::exists(dir / "out" / "warped_t0.000.png"));
  CHECK(std::filesystem::exists(dir / "out" / "diff_t0.150.png"));
  CHECK_FALSE(std::filesystem::exists(dir / "out" / "warped_t1.000.png"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("first CSV row holds the initial homography error") {
  const auto dir = test::scratch_dir("sim_first");
  save_image(test::smooth_image(64, 64), dir / "scene.pgm");
  SimulationConfig cfg = parse_config(kPaperConfig, dir);
  cfg.duration = 0.05;
  const SimulationResult r = run_simulation(cfg, load_reference(cfg));
  const double expected = (Mat3::Identity() - cfg.h0.inverse().matrix()).squaredNorm();
  CHECK(r.rows.front().t == 0.0);
  CHECK(r.rows.front().eps_h == doctest::Approx(expected).epsilon(1e-14));
  CHECK(r.rows.size() == 6);
  CHECK(r.det_h_hat.size() == 5);
  CHECK(r.rows[3].t == doctest::Approx(0.03).epsilon(1e-14));
  std::filesystem::remove_all(dir);
}

TEST_CASE("compare writes one merged table") {
  const auto dir = test::scratch_dir("sim_compare");
  save_image(test::smooth_image(64, 64), dir / "scene.pgm");
  SimulationConfig cfg = parse_config(kPaperConfig, dir);
  cfg.duration = 0.05;
  cfg.output_dir = dir / "cmp";
  const auto variants = std::vector<GainConfig>{GainConfig::parse("scalar:0.01"),
                                                GainConfig::parse("inverse_hessian:0.01"),
                                                GainConfig::parse("dual_gain:0.01:0.02"),
                                                GainConfig::parse("scalar:0.5")};
  const auto results = compare(cfg, variants);
  REQUIRE(results.size() == 4);
  for (const auto& r : results) {
    REQUIRE(r.rows.size() == results[0].rows.size());
    for (std::size_t i = 0; i < r.rows.size(); ++i) CHECK(r.rows[i].t == results[0].rows[i].t);
  }
  const std::string csv = slurp(dir / "cmp" / "compare.csv");
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header.rfind("t,eps_h_scalar,eps_i_scalar,cost_scalar,delta_norm_scalar,eps_h_inverse_hessian", 0) == 0);
  CHECK(header.find("eps_h_scalar_2") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "cmp" / "dual_gain" / "errors.csv"));
  CHECK_THROWS_AS(compare(cfg, {}), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("difference images are stretched") {
  const RasterImage a(2, 1, {0.2, 0.5}, Calibration{});
  const RasterImage b(2, 1, {0.3, 0.3}, Calibration{});
  const RasterImage d = difference_image(a, b);
  CHECK(d.at(0, 0) == doctest::Approx(0.5));
  CHECK(d.at(1, 0) == 1.0);
  CHECK(difference_image(a, a).at(1, 0) == 0.0);
}

TEST_CASE("report text") {
  Mat8 h = Mat8::Identity() * 2.0;
  h(0, 0) = 1e-9;
  const std::string text = format_report(analyse_hessian(h));
  CHECK(text.rfind("eigenvalues:\n2.0000000000000000e+00\n", 0) == 0);
  CHECK(text.find("1.0000000000000001e-09\nmin_ratio: ") != std::string::npos);
  CHECK(text.find("verdict: degenerate\nnull_directions: 1\n") != std::string::npos);
}
