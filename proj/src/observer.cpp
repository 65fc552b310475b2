#include "hobs/observer.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace hobs {
namespace {

// Sums fn(sample, acc) over the grid. Deterministic mode walks the pixels in
// order; otherwise contiguous chunks are reduced on worker threads and the
// partial sums combined in chunk order.
template <typename Acc, typename Fn>
Acc reduce_grid(const PixelGrid& grid, EvalOptions opts, Fn fn) {
  const auto& samples = grid.samples();
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (opts.deterministic || workers == 1 || samples.size() < 4096) {
    Acc acc;
    for (const auto& s : samples) fn(s, acc);
    return acc;
  }
  std::vector<Acc> partial(workers);
  std::vector<std::thread> threads;
  const std::size_t chunk = (samples.size() + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(samples.size(), begin + chunk);
      for (std::size_t i = begin; i < end; ++i) fn(samples[i], partial[w]);
    });
  }
  for (auto& t : threads) t.join();
  Acc acc;
  for (const auto& p : partial) acc += p;
  return acc;
}

struct ResidualSums {
  double weighted = 0.0;  // sum r^2 w
  double plain = 0.0;     // sum r^2
  ResidualSums& operator+=(const ResidualSums& o) {
    weighted += o.weighted;
    plain += o.plain;
    return *this;
  }
};

ResidualSums residual_sums(const SphericalImage& warped, const SphericalImage& ref,
                           const PixelGrid& grid, EvalOptions opts) {
  return reduce_grid<ResidualSums>(
      grid, opts, [&](const GridSample& s, ResidualSums& acc) {
        const double r = warped.sample_ray(s.ray) - ref.sample_ray(s.ray);
        acc.weighted += r * r * s.weight;
        acc.plain += r * r;
      });
}

struct MatrixSum {
  Mat3 m = Mat3::Zero();
  MatrixSum& operator+=(const MatrixSum& o) {
    m += o.m;
    return *this;
  }
};

struct HessianSum {
  Mat8 h = Mat8::Zero();
  HessianSum& operator+=(const HessianSum& o) {
    h += o.h;
    return *this;
  }
};

}  // namespace

GainConfig::GainConfig(ScalarGain g) : v_(g) {
  if (!(g.k_delta > 0.0)) throw ConfigError("scalar gain must be positive");
}

GainConfig::GainConfig(InverseHessianGain g) : v_(g) {
  if (!(g.k_delta > 0.0)) throw ConfigError("inverse-Hessian gain must be positive");
  if (!(g.ridge >= 0.0)) throw ConfigError("ridge must be non-negative");
}

GainConfig::GainConfig(DualGain g) : v_(g) {
  if (!(g.k_s > 0.0) || !(g.k_a > 0.0)) {
    throw ConfigError("dual gains k_s and k_a must be positive");
  }
}

std::string GainConfig::kind() const {
  switch (v_.index()) {
    case 0: return "scalar";
    case 1: return "inverse_hessian";
    default: return "dual_gain";
  }
}

std::string GainConfig::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << kind();
  if (const auto* s = std::get_if<ScalarGain>(&v_)) {
    os << ':' << s->k_delta;
  } else if (const auto* h = std::get_if<InverseHessianGain>(&v_)) {
    os << ':' << h->k_delta << ':' << h->ridge;
  } else {
    const auto& d = std::get<DualGain>(v_);
    os << ':' << d.k_s << ':' << d.k_a;
  }
  return os.str();
}

GainConfig GainConfig::parse(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  auto num = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      const double v = std::stod(parts.at(i), &used);
      if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("malformed gain specification '" + spec + "'");
    }
  };
  if (parts.empty()) throw ConfigError("empty gain specification");
  const std::string& kind = parts[0];
  if (kind == "scalar" && parts.size() == 2) return GainConfig(ScalarGain{num(1)});
  if (kind == "inverse_hessian" && (parts.size() == 2 || parts.size() == 3)) {
    InverseHessianGain g{num(1)};
    if (parts.size() == 3) g.ridge = num(2);
    return GainConfig(g);
  }
  if (kind == "dual_gain" && parts.size() == 3) {
    return GainConfig(DualGain{num(1), num(2)});
  }
  throw ConfigError("malformed gain specification '" + spec +
                    "' (expected scalar:k, inverse_hessian:k[:ridge] or "
                    "dual_gain:k_s:k_a)");
}

SphericalImage warped_error_image(const Group& h_hat, const SphericalImage& image) {
  return image.warp(h_hat.inverse());
}

double photometric_cost(const Group& h_hat, const SphericalImage& image,
                        const SphericalImage& ref, const PixelGrid& grid,
                        EvalOptions opts) {
  return 0.5 * residual_sums(warped_error_image(h_hat, image), ref, grid, opts).weighted;
}

Mat3 correction_integral(const Group& h_hat, const SphericalImage& image,
                         const SphericalImage& ref, const PixelGrid& grid,
                         EvalOptions opts) {
  const SphericalImage warped = warped_error_image(h_hat, image);
  return reduce_grid<MatrixSum>(grid, opts,
                                [&](const GridSample& s, MatrixSum& acc) {
                                  double value = 0.0;
                                  Vec3 g;
                                  if (!warped.sample_and_gradient(s.ray, value, g)) {
                                    return;  // masked gradient
                                  }
                                  const double r = value - ref.sample_ray(s.ray);
                                  acc.m.noalias() += (r * s.weight) * g * s.ray.transpose();
                                })
      .m;
}

Mat8 cost_hessian(const SphericalImage& ref, const PixelGrid& grid, EvalOptions opts) {
  Mat8 h = reduce_grid<HessianSum>(grid, opts,
                                   [&](const GridSample& s, HessianSum& acc) {
                                     double value = 0.0;
                                     Vec3 g;
                                     if (!ref.sample_and_gradient(s.ray, value, g)) return;
                                     const Mat3 gx = g * s.ray.transpose();
                                     const Coords8 v = vee(gx);
                                     acc.h.noalias() += s.weight * v * v.transpose();
                                   })
               .h;
  return 0.5 * (h + h.transpose());
}

Algebra apply_scalar_gain(const Mat3& m, double k_delta) {
  return Algebra::traceless(k_delta * m);
}

Algebra apply_dual_gain(const Mat3& m, double k_s, double k_a) {
  const auto [sym, skew] = sym_skew_split(m);
  return Algebra::traceless(k_s * sym + k_a * skew);
}

Algebra apply_inverse_hessian_gain(const Mat3& m, const Mat8& hessian,
                                   double k_delta, double ridge) {
  Eigen::SelfAdjointEigenSolver<Mat8> eig(hessian);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (ridge == 0.0 && !(lmin > 1e-10 * lmax)) {
    throw SingularHessian("cost Hessian is singular (lambda_min/lambda_max = " +
                          std::to_string(lmax > 0.0 ? lmin / lmax : 0.0) +
                          "); the reference image is not observable");
  }
  const double shift = ridge * std::max(lmax, 0.0);
  const Eigen::Matrix<double, 8, 1> inv =
      (eig.eigenvalues().array() + shift).inverse().matrix();
  const Coords8 v = eig.eigenvectors() *
                    inv.asDiagonal() * (eig.eigenvectors().transpose() * vee(m));
  return wedge<double>(k_delta * v);
}

Algebra correction_scalar(const Group& h_hat, const SphericalImage& image,
                          const SphericalImage& ref, const PixelGrid& grid,
                          double k_delta, EvalOptions opts) {
  return apply_scalar_gain(correction_integral(h_hat, image, ref, grid, opts), k_delta);
}

Algebra correction_inverse_hessian(const Group& h_hat, const SphericalImage& image,
                                   const SphericalImage& ref, const PixelGrid& grid,
                                   double k_delta, double ridge, EvalOptions opts) {
  const Mat8 hess = cost_hessian(ref, grid, opts);
  return apply_inverse_hessian_gain(correction_integral(h_hat, image, ref, grid, opts),
                                    hess, k_delta, ridge);
}

Algebra correction_dual_gain(const Group& h_hat, const SphericalImage& image,
                             const SphericalImage& ref, const PixelGrid& grid,
                             double k_s, double k_a, EvalOptions opts) {
  return apply_dual_gain(correction_integral(h_hat, image, ref, grid, opts), k_s, k_a);
}

CorrectionContext::CorrectionContext(SphericalImage ref, PixelGrid grid,
                                     EvalOptions opts)
    : ref_(std::move(ref)), grid_(std::move(grid)), opts_(opts) {}

const Mat8& CorrectionContext::hessian() const {
  if (!hessian_) hessian_ = cost_hessian(ref_, grid_, opts_);
  return *hessian_;
}

Algebra CorrectionContext::correction(const GainConfig& gains, const Group& h_hat,
                                      const SphericalImage& image) const {
  const Mat3 m = correction_integral(h_hat, image, ref_, grid_, opts_);
  return std::visit(
      [&](const auto& g) -> Algebra {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, ScalarGain>) {
          return apply_scalar_gain(m, g.k_delta);
        } else if constexpr (std::is_same_v<G, InverseHessianGain>) {
          return apply_inverse_hessian_gain(m, hessian(), g.k_delta, g.ridge);
        } else {
          return apply_dual_gain(m, g.k_s, g.k_a);
        }
      },
      gains.variant());
}

ObserverState step(const ObserverState& state, const Algebra& velocity,
                   const SphericalImage& image, const CorrectionContext& ctx,
                   double dt) {
  if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
  return advance(state, ctx.correction(state.gains, state.h_hat, image), velocity, dt);
}

ObserverState advance(const ObserverState& state, const Algebra& delta,
                      const Algebra& velocity, double dt) {
  if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
  ObserverState next = state;
  next.h_hat = project_sl3<double>(group_exp(dt * delta).matrix() *
                                   state.h_hat.matrix() *
                                   group_exp(dt * velocity).matrix());
  next.t = state.t + dt;
  next.last_delta = delta;
  return next;
}

ObserverState step_open_loop(const ObserverState& state, const Algebra& velocity,
                             double dt) {
  if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
  ObserverState next = state;
  next.h_hat = project_sl3<double>(state.h_hat.matrix() *
                                   group_exp(dt * velocity).matrix());
  next.t = state.t + dt;
  next.last_delta = Algebra::Zero();
  return next;
}

TruthState propagate_truth(const TruthState& truth, double dt) {
  if (!(dt > 0.0)) throw ConfigError("propagate_truth: dt must be positive");
  TruthState next = truth;
  next.h = project_sl3<double>(truth.h.matrix() * group_exp(dt * truth.velocity).matrix());
  return next;
}

ErrorReport error_metrics(const TruthState& truth, const ObserverState& state,
                          const SphericalImage& image, const SphericalImage& ref,
                          const PixelGrid& grid, EvalOptions opts) {
  ErrorReport report;
  report.t = state.t;
  const Mat3 e = state.h_hat.matrix() * truth.h.inverse().matrix();
  report.eps_h = (Mat3::Identity() - e).squaredNorm();
  const ResidualSums sums =
      residual_sums(warped_error_image(state.h_hat, image), ref, grid, opts);
  report.cost = 0.5 * sums.weighted;
  report.eps_i = grid.size() ? sums.plain / static_cast<double>(grid.size()) : 0.0;
  return report;
}

ObservabilityReport analyse_hessian(const Mat8& hessian, double threshold) {
  Eigen::SelfAdjointEigenSolver<Mat8> eig(hessian);
  ObservabilityReport report;
  const auto& values = eig.eigenvalues();  // ascending
  const double lmax = values.maxCoeff();
  const double lmin = values.minCoeff();
  for (int i = 7; i >= 0; --i) report.eigenvalues.push_back(values[i]);
  report.min_ratio = lmax > 0.0 ? lmin / lmax : 0.0;
  report.observable = report.min_ratio >= threshold;
  for (int i = 0; i < 8; ++i) {
    const bool small = lmax > 0.0 ? values[i] < threshold * lmax : true;
    if (small) report.null_directions.push_back(eig.eigenvectors().col(i));
  }
  return report;
}

ObservabilityReport check_nondegeneracy(const SphericalImage& ref,
                                        const PixelGrid& grid, EvalOptions opts,
                                        double threshold) {
  return analyse_hessian(cost_hessian(ref, grid, opts), threshold);
}

}  // namespace hobs
