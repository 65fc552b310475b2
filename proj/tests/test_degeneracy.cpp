#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "hobs/degeneracy.hpp"
#include "hobs/observer.hpp"
#include "support.hpp"

using namespace hobs;

namespace {

DegenerateImageOptions small_options() {
  DegenerateImageOptions o;
  o.width = 96;
  o.height = 96;
  o.n_seeds = 40;
  return o;
}

}  // namespace

TEST_CASE("builtin generators") {
  const auto gens = builtin_generators();
  REQUIRE(gens.size() == 6);
  for (const auto& g : gens) {
    CHECK(std::abs(g.d.matrix().trace()) < 1e-15);
    CHECK(g.d.norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_FALSE(g.label.empty());
  }
  CHECK((gens[0].d.matrix() - basis(5).matrix()).norm() == 0.0);
  CHECK_THROWS_AS(SymmetryGenerator(Algebra::Zero(), "none"), InvariantViolation);
}

TEST_CASE("rotation generator gives concentric rings") {
  const auto opts = small_options();
  const RasterImage img = generate_degenerate_image(builtin_generators()[0], opts);
  const SphericalImage sph(img);
  const Calibration& k = img.calib();
  const double cu = k.matrix()(0, 2);
  const double cv = k.matrix()(1, 2);
  double worst = 0.0;
  for (double r = 3.0; r < 45.0; r += 2.5) {
    const double ref = sph.sample(pixel_to_ray(k, Pixel{cu + r, cv}));
    for (double a = 0.3; a < 6.28; a += 0.4) {
      const Pixel p{cu + r * std::cos(a), cv + r * std::sin(a)};
      worst = std::max(worst, std::abs(sph.sample(pixel_to_ray(k, p)) - ref));
    }
  }
  CHECK(worst <= 2.0 / 255.0);
}

TEST_CASE("a single seed marks a single orbit") {
  auto opts = small_options();
  opts.n_seeds = 1;
  const RasterImage img = generate_degenerate_image(builtin_generators()[0], opts);
  // brightest deviation from the background sits on the seed's orbit
  int best = 0;
  for (std::size_t i = 1; i < img.size(); ++i) {
    if (std::abs(img.data()[i] - 0.5) > std::abs(img.data()[best] - 0.5)) best = static_cast<int>(i);
  }
  const double cu = img.calib().matrix()(0, 2);
  const double cv = img.calib().matrix()(1, 2);
  const double r = std::hypot(best % img.width() - cu, best / img.width() - cv);
  const SphericalImage sph(img);
  const double on_curve = img.data()[best];
  CHECK(std::abs(on_curve - 0.5) > 0.1);
  for (double a = 0.0; a < 6.28; a += 0.2) {
    const Pixel p{cu + r * std::cos(a), cv + r * std::sin(a)};
    if (!img.contains(p)) continue;
    CHECK(std::abs(sph.sample(pixel_to_ray(img.calib(), p)) - on_curve) <= 2.0 / 255.0);
  }
}

TEST_CASE("generated images are stabilised by their generator") {
  const auto opts = small_options();
  for (int i : {0, 1, 5}) {
    const auto gen = builtin_generators()[i];
    const SphericalImage img(generate_degenerate_image(gen, opts));
    const StabilizerResidual at_zero = verify_stabilizer(img, gen, {0.0});
    CHECK(at_zero.mean_abs == 0.0);
    CHECK(at_zero.max_abs == 0.0);
    const StabilizerResidual r = verify_stabilizer(img, gen, {-0.2, -0.1, 0.1, 0.2});
    CHECK(r.count > 1000);
    CHECK(r.mean_abs <= 2.0 / 255.0);

    const Mat8 h = cost_hessian(img, build_pixel_grid(img.source()));
    Eigen::SelfAdjointEigenSolver<Mat8> eig(h);
    const Coords8 g = vee(gen.d);
    CHECK(g.dot(h * g) <= 1e-4 * eig.eigenvalues().maxCoeff() * g.squaredNorm());
  }
}

TEST_CASE("textured images are not stabilised") {
  const RasterImage tex = load_image(HOBS_DATA_DIR "/reference.pgm");
  const SphericalImage img(tex);
  const StabilizerResidual r = verify_stabilizer(img, builtin_generators()[0], {0.3});
  CHECK(r.mean_abs > 10.0 / 255.0);
}

TEST_CASE("generation is deterministic") {
  const auto opts = small_options();
  const auto gen = builtin_generators()[3];
  CHECK(generate_degenerate_image(gen, opts).data() == generate_degenerate_image(gen, opts).data());
  auto other = opts;
  other.rng_seed = 7;
  CHECK(generate_degenerate_image(gen, opts).data() != generate_degenerate_image(gen, other).data());
}

TEST_CASE("parabolic images make the inverse-Hessian gain fail") {
  const auto gen = builtin_generators()[5];
  const SphericalImage img(generate_degenerate_image(gen, small_options()));
  const Mat8 h = cost_hessian(img, build_pixel_grid(img.source()));
  CHECK_THROWS_AS(apply_inverse_hessian_gain(basis(1).matrix(), h, 1.0, 0.0),
                  SingularHessian);
  CHECK_FALSE(analyse_hessian(h).observable);
}

TEST_CASE("generation argument checks") {
  const auto gen = builtin_generators()[1];
  auto opts = small_options();
  opts.n_seeds = 0;
  CHECK_THROWS_AS(generate_degenerate_image(gen, opts), ConfigError);
  opts = small_options();
  opts.n_steps = 1;
  CHECK_THROWS_AS(generate_degenerate_image(gen, opts), ConfigError);
  opts = small_options();
  opts.t_span = 1e-9;  // every seed is too slow to sweep its orbit
  CHECK_THROWS_AS(generate_degenerate_image(gen, opts), EmptyRaster);
}
