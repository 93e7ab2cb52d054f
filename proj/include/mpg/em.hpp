#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mpg/mixture.hpp"

namespace mpg {

struct EmConfig {
  std::size_t n_components = 1;
  std::size_t max_iters = 100;
  double loglik_tol = 1e-6;
  double param_tol = 1e-8;
  std::uint64_t seed = 0;
  enum class Init { kSphereKmeans, kRandomRestart };
  Init init_strategy = Init::kSphereKmeans;
  /// true: component densities carry the 1/C renormalization;
  /// false: plain chart Gaussians (the literal step-2/step-4 formulas).
  bool renormalized_density = true;
  McConfig mc{};
};

struct EmTrace {
  /// Log-likelihood sequence before tangent-point resetting; entry 0 is the
  /// value at the initial parameters. Non-decreasing up to tolerance.
  std::vector<double> loglik;
  /// Log-likelihood after each iteration's tangent-point reset.
  std::vector<double> loglik_after_reset;
  Eigen::MatrixXd responsibilities;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

namespace detail {

inline double em_log_density(const ProjectedGaussian& pg, const RigidMotion& x, bool renormalized) {
  const auto y = try_lift(pg.chart(), x);
  if (!y) return -std::numeric_limits<double>::infinity();
  const double g = pg.log_gauss_density(*y);
  return renormalized ? g - std::log(pg.norm_const()) : g;
}

inline Eigen::MatrixXd em_log_weighted(const Mpg& m, const std::vector<RigidMotion>& samples,
                                       bool renormalized) {
  const std::size_t n = samples.size();
  const std::size_t k = m.size();
  Eigen::MatrixXd lw(n, k);
  for (std::size_t i = 0; i < k; ++i) {
    const double lambda = std::log(m[i].weight);
    for (std::size_t j = 0; j < n; ++j)
      lw(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          lambda + em_log_density(m[i].pg, samples[j], renormalized);
  }
  return lw;
}

}  // namespace detail

/// Mixture log-likelihood of the samples.
inline double em_loglik(const Mpg& m, const std::vector<RigidMotion>& samples,
                        bool renormalized = true) {
  const Eigen::MatrixXd lw = detail::em_log_weighted(m, samples, renormalized);
  double total = 0.0;
  for (Eigen::Index j = 0; j < lw.rows(); ++j) {
    const double mx = lw.row(j).maxCoeff();
    if (!std::isfinite(mx)) return -std::numeric_limits<double>::infinity();
    total += mx + std::log((lw.row(j).array() - mx).exp().sum());
  }
  return total;
}

/// Responsibilities gamma(z_{j,i}); rows sum to one. A sample with zero
/// density under every component is an orphan.
inline Eigen::MatrixXd e_step(const Mpg& m, const std::vector<RigidMotion>& samples,
                              bool renormalized = true) {
  Eigen::MatrixXd lw = detail::em_log_weighted(m, samples, renormalized);
  for (Eigen::Index j = 0; j < lw.rows(); ++j) {
    const double mx = lw.row(j).maxCoeff();
    if (!std::isfinite(mx))
      throw OrphanSample("sample " + std::to_string(j) + " cannot be lifted into any component chart");
    const Eigen::ArrayXd w = (lw.row(j).array() - mx).exp();
    lw.row(j) = w / w.sum();
  }
  return lw;
}

/// M step on the current component charts: weighted chart moments and weights
/// N_i / N. Components with vanishing responsibility mass are removed (with a
/// warning) and are not re-centered here; the caller resets tangent points.
inline std::vector<Weighted> m_step(const Mpg& m, const std::vector<RigidMotion>& samples,
                                    const Eigen::MatrixXd& resp, const McConfig& mc,
                                    std::vector<std::string>* warnings = nullptr) {
  const std::size_t n = samples.size();
  const std::size_t k = m.size();
  std::vector<Weighted> out;
  for (std::size_t i = 0; i < k; ++i) {
    const auto col = resp.col(static_cast<Eigen::Index>(i));
    const double ni = col.sum();
    if (ni <= 1e-6) {
      if (warnings) warnings->push_back("component " + std::to_string(i) + " emptied and was removed");
      continue;
    }
    const TangentChart& chart = m[i].pg.chart();
    Vec6 mean = Vec6::Zero();
    std::vector<std::pair<double, Vec6>> lifted;
    lifted.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double g = col(static_cast<Eigen::Index>(j));
      if (g == 0.0) continue;
      const auto y = try_lift(chart, samples[j]);
      if (!y) continue;  // zero responsibility is expected here anyway
      lifted.emplace_back(g, *y);
      mean += g * *y;
    }
    mean /= ni;
    Mat6 cov = Mat6::Zero();
    for (const auto& [g, y] : lifted) {
      const Vec6 d = y - mean;
      cov += g * (d * d.transpose());
    }
    cov = detail::symmetrized(cov / ni) + 1e-9 * Mat6::Identity();
    out.push_back({ni / static_cast<double>(n), pg_new(chart, mean, cov, mc)});
  }
  if (out.empty()) throw Error("all components emptied in the M step");
  return out;
}

namespace detail {

/// Spherical k-means with antipodal fold on canonical-sign quaternions.
/// Returns cluster centers and assignments.
inline std::pair<std::vector<Vec4>, std::vector<std::size_t>> sphere_kmeans(
    const std::vector<Vec4>& points, std::size_t k, Rng& rng, bool lloyd) {
  const std::size_t n = points.size();
  std::vector<Vec4> centers;
  centers.reserve(k);

  if (lloyd) {
    // k-means++ seeding with folded distance 1 - <q,c>^2
    centers.push_back(points[rng.next_u64() % n]);
    std::vector<double> dist(n);
    while (centers.size() < k) {
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : centers) {
          const double d = 1.0 - std::pow(points[j].dot(c), 2.0);
          best = std::min(best, d);
        }
        dist[j] = best;
        total += best;
      }
      std::size_t pick = rng.next_u64() % n;
      if (total > 0.0) {
        const double u = rng.uniform() * total;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          acc += dist[j];
          if (u < acc) {
            pick = j;
            break;
          }
        }
      }
      centers.push_back(points[pick]);
    }
  } else {
    // distinct random picks
    std::vector<std::size_t> idx(n);
    for (std::size_t j = 0; j < n; ++j) idx[j] = j;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t r = i + rng.next_u64() % (n - i);
      std::swap(idx[i], idx[r]);
      centers.push_back(points[idx[i]]);
    }
  }

  std::vector<std::size_t> assign(n, 0);
  auto assign_all = [&]() {
    bool changed = false;
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t best = 0;
      double bd = -1.0;
      for (std::size_t i = 0; i < centers.size(); ++i) {
        const double d = std::abs(points[j].dot(centers[i]));
        if (d > bd) {
          bd = d;
          best = i;
        }
      }
      if (assign[j] != best) changed = true;
      assign[j] = best;
    }
    return changed;
  };

  assign_all();
  if (lloyd) {
    for (int it = 0; it < 50; ++it) {
      for (std::size_t i = 0; i < k; ++i) {
        Vec4 sum = Vec4::Zero();
        std::size_t count = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (assign[j] != i) continue;
          sum += (points[j].dot(centers[i]) >= 0.0 ? 1.0 : -1.0) * points[j];
          ++count;
        }
        if (count == 0) {
          // reseed an empty cluster at the sample farthest from its center
          std::size_t far = 0;
          double fd = 2.0;
          for (std::size_t j = 0; j < n; ++j) {
            const double d = std::abs(points[j].dot(centers[assign[j]]));
            if (d < fd) {
              fd = d;
              far = j;
            }
          }
          centers[i] = points[far];
        } else if (sum.norm() > 0.0) {
          centers[i] = sum.normalized();
        }
      }
      if (!assign_all()) break;
    }
  }
  return {centers, assign};
}

}  // namespace detail

/// Initial mixture: tangent points from spherical k-means on the rotation
/// quaternions (or random picks), per-cluster translation means, cluster
/// sample covariances + 1e-6 I, uniform weights.
inline Mpg em_init(const std::vector<RigidMotion>& samples, const EmConfig& cfg) {
  const std::size_t k = cfg.n_components;
  if (k < 1) throw Error("n_components must be at least 1");
  if (samples.size() < 10 * k)
    throw TooFewSamples("need at least " + std::to_string(10 * k) + " samples for " +
                        std::to_string(k) + " components, got " + std::to_string(samples.size()));

  std::vector<Vec4> rotations(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) rotations[j] = samples[j].rotation().coeffs();

  Rng rng(cfg.seed);
  const bool lloyd = cfg.init_strategy == EmConfig::Init::kSphereKmeans;
  const auto [centers, assign] = detail::sphere_kmeans(rotations, k, rng, lloyd);

  std::vector<Weighted> comps;
  for (std::size_t i = 0; i < k; ++i) {
    const TangentChart chart = chart_at(canonical_sign(UnitQuaternion(Quaternion::from_coeffs(centers[i]))));
    std::vector<Vec6> lifted;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      if (assign[j] != i) continue;
      const auto y = try_lift(chart, samples[j]);
      if (y) lifted.push_back(*y);
    }
    if (lifted.empty()) continue;
    Vec6 mean = Vec6::Zero();
    for (const auto& y : lifted) mean += y;
    mean /= static_cast<double>(lifted.size());
    Mat6 cov = Mat6::Zero();
    for (const auto& y : lifted) {
      const Vec6 d = y - mean;
      cov += d * d.transpose();
    }
    cov = detail::symmetrized(cov / static_cast<double>(lifted.size())) + 1e-6 * Mat6::Identity();
    Vec6 mu = Vec6::Zero();
    mu.tail<3>() = mean.tail<3>();
    comps.push_back({1.0, pg_new(chart, mu, cov, cfg.mc)});
  }
  if (comps.empty()) throw Error("initialization produced no usable cluster");
  return Mpg(std::move(comps));
}

/// The EM loop: E step, M step on fixed charts, convergence bookkeeping, then
/// tangent-point resetting so every component stays in PG0.
inline std::pair<Mpg, EmTrace> em_fit(const std::vector<RigidMotion>& samples, const EmConfig& cfg) {
  Mpg mixture = em_init(samples, cfg);
  EmTrace trace;
  trace.loglik.push_back(em_loglik(mixture, samples, cfg.renormalized_density));

  double prev = trace.loglik.front();
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    const Eigen::MatrixXd resp = e_step(mixture, samples, cfg.renormalized_density);
    const std::size_t before = mixture.size();
    std::vector<Weighted> updated = m_step(mixture, samples, resp, cfg.mc, &trace.warnings);

    // largest parameter change on the shared charts
    double delta = std::numeric_limits<double>::infinity();
    if (updated.size() == before) {
      delta = 0.0;
      for (std::size_t i = 0; i < before; ++i) {
        delta = std::max(delta, (updated[i].pg.mu() - mixture[i].pg.mu()).lpNorm<Eigen::Infinity>());
        delta = std::max(delta, (updated[i].pg.sigma() - mixture[i].pg.sigma()).lpNorm<Eigen::Infinity>());
        delta = std::max(delta, std::abs(updated[i].weight - mixture[i].weight));
      }
    }

    const Mpg pre_reset(updated);
    const double loglik = em_loglik(pre_reset, samples, cfg.renormalized_density);
    trace.loglik.push_back(loglik);

    std::vector<Weighted> reset;
    reset.reserve(updated.size());
    for (auto& c : updated) reset.push_back({c.weight, pg_recenter(c.pg, cfg.mc)});
    mixture = Mpg(std::move(reset));
    trace.loglik_after_reset.push_back(em_loglik(mixture, samples, cfg.renormalized_density));
    trace.iterations = it;

    if (std::abs(loglik - prev) < cfg.loglik_tol || delta < cfg.param_tol) {
      trace.converged = true;
      break;
    }
    prev = loglik;
  }
  trace.responsibilities = e_step(mixture, samples, cfg.renormalized_density);
  return {mixture, trace};
}

}  // namespace mpg
