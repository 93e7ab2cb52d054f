#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mpg/format.hpp"
#include "mpg/projected_gaussian.hpp"

namespace mpg {

/// Pairs fused with raw weight below this floor are skipped so that delta
/// underflow cannot create zero-weight components.
inline constexpr double kFusionWeightFloor = 1e-12;

struct Weighted {
  double weight;
  ProjectedGaussian pg;
};

/// Mixture of Projected Gaussians: a convex combination of PG base elements.
/// Weights are stored normalized; the constructor rescales.
class Mpg {
 public:
  explicit Mpg(std::vector<Weighted> components) : components_(std::move(components)) {
    if (components_.empty()) throw Error("mixture needs at least one component");
    double sum = 0.0;
    for (const auto& c : components_) {
      if (!(c.weight >= 0.0)) throw Error("mixture weights must be nonnegative");
      sum += c.weight;
    }
    if (!(sum > 0.0)) throw Error("mixture weights sum to zero");
    for (auto& c : components_) c.weight /= sum;
  }

  static Mpg single(ProjectedGaussian pg) { return Mpg({{1.0, std::move(pg)}}); }

  const std::vector<Weighted>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }
  const Weighted& operator[](std::size_t i) const { return components_[i]; }

 private:
  std::vector<Weighted> components_;
};

/// What a reduction did: dropped components (index, weight at drop time),
/// merges (pair of indices at merge time, weighted sKL cost) and the
/// accumulated total-probability bound 2*sum of dropped weights.
struct ReductionReport {
  std::vector<std::pair<std::size_t, double>> dropped;
  struct Merge {
    std::size_t i;
    std::size_t j;
    double cost;
  };
  std::vector<Merge> merged;
  double bound = 0.0;

  std::string to_text() const {
    std::string out;
    for (const auto& [idx, w] : dropped)
      out += "dropped index=" + std::to_string(idx) + " weight=" + double_to_string(w) + "\n";
    for (const auto& m : merged)
      out += "merged i=" + std::to_string(m.i) + " j=" + std::to_string(m.j) +
             " cost=" + double_to_string(m.cost) + "\n";
    out += "bound=" + double_to_string(bound) + "\n";
    return out;
  }
};

inline double mpg_density(const Mpg& m, const RigidMotion& x) {
  double p = 0.0;
  for (const auto& c : m.components()) p += c.weight * pg_density(c.pg, x);
  return p;
}

/// Ancestral sampling: a component from the categorical weights, then the
/// component's projected Gaussian.
inline RigidMotion mpg_sample(const Mpg& m, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t pick = m.size() - 1;
  for (std::size_t i = 0; i < m.size(); ++i) {
    acc += m[i].weight;
    if (u < acc) {
      pick = i;
      break;
    }
  }
  return pg_sample(m[pick].pg, rng);
}

/// Hard chart-compatibility gate: 1 when the folded tangent-point angle is
/// below the fusion threshold.
inline int alpha_compat(const ProjectedGaussian& pi, const ProjectedGaussian& pj,
                        double max_angle = kDefaultFusionAngle) {
  return chart_angle(pi.chart(), pj.chart()) < max_angle ? 1 : 0;
}

/// Mahalanobis plausibility factor exp(-(1/2) d^2) with both components
/// restated to the midpoint chart.
inline double delta_compat(const ProjectedGaussian& pi, const ProjectedGaussian& pj,
                           double max_angle = kDefaultFusionAngle) {
  const TangentChart chart = common_chart(pi.chart(), pj.chart(), max_angle);
  const auto [mu1, s1] = restate_moments(pi, chart);
  const auto [mu2, s2] = restate_moments(pj, chart);
  const Vec6 d = mu1 - mu2;
  const double d2 = d.dot(Mat6(s1 + s2).llt().solve(d));
  return std::exp(-0.5 * d2);
}

/// Mixture fusion: pairwise PG fusion weighted by plausibility
/// lambda = alpha * delta times the prior weights. Pairs gated out by alpha
/// or falling below the weight floor are counted as skipped.
inline std::pair<Mpg, std::size_t> mpg_fuse(const Mpg& m1, const Mpg& m2, const McConfig& mc = {},
                                            double max_angle = kDefaultFusionAngle,
                                            double floor = kFusionWeightFloor) {
  std::vector<Weighted> out;
  std::size_t skipped = 0;
  for (const auto& a : m1.components()) {
    for (const auto& b : m2.components()) {
      if (!alpha_compat(a.pg, b.pg, max_angle)) {
        ++skipped;
        continue;
      }
      const double w = delta_compat(a.pg, b.pg, max_angle) * a.weight * b.weight;
      if (w < floor) {
        ++skipped;
        continue;
      }
      out.push_back({w, pg_fuse(a.pg, b.pg, mc, max_angle)});
    }
  }
  if (out.empty())
    throw NoCompatiblePairs("no component pair is chart-compatible with weight above the floor");
  return {Mpg(std::move(out)), skipped};
}

/// Mixture composition: all pairwise PG compositions, weights are the
/// products of the prior weights (no plausibility factor).
inline Mpg mpg_compose(const Mpg& m1, const Mpg& m2, const McConfig& mc = {}) {
  std::vector<Weighted> out;
  out.reserve(m1.size() * m2.size());
  for (const auto& a : m1.components())
    for (const auto& b : m2.components()) out.push_back({a.weight * b.weight, pg_compose(a.pg, b.pg, mc)});
  return Mpg(std::move(out));
}

/// Iteratively removes the lowest-weight component while it is below the
/// floor, renormalizing after each removal. Reported indices refer to the
/// input mixture.
inline std::pair<Mpg, ReductionReport> mpg_drop(const Mpg& m, double floor) {
  std::vector<Weighted> comps = m.components();
  std::vector<std::size_t> original(comps.size());
  for (std::size_t i = 0; i < original.size(); ++i) original[i] = i;

  ReductionReport report;
  for (;;) {
    std::size_t lowest = 0;
    for (std::size_t i = 1; i < comps.size(); ++i)
      if (comps[i].weight < comps[lowest].weight) lowest = i;
    if (comps[lowest].weight >= floor) break;
    if (comps.size() == 1)
      throw AllComponentsDropped("floor " + double_to_string(floor) + " drops every component");
    const double w = comps[lowest].weight;
    report.dropped.emplace_back(original[lowest], w);
    report.bound += 2.0 * w;
    comps.erase(comps.begin() + static_cast<std::ptrdiff_t>(lowest));
    original.erase(original.begin() + static_cast<std::ptrdiff_t>(lowest));
    for (auto& c : comps) c.weight /= (1.0 - w);
  }
  return {Mpg(std::move(comps)), report};
}

namespace detail {

/// Symmetric Kullback-Leibler divergence of two Gaussians on one chart:
/// (1/2) tr(S2^-1 S1 + S1^-1 S2 + (S1^-1 + S2^-1) dd^T) - 6.
inline double skl_gaussians(const Vec6& mu1, const Mat6& s1, const Vec6& mu2, const Mat6& s2) {
  const Mat6 i1 = s1.llt().solve(Mat6::Identity());
  const Mat6 i2 = s2.llt().solve(Mat6::Identity());
  const Vec6 d = mu1 - mu2;
  const double tr = (i2 * s1).trace() + (i1 * s2).trace();
  const double quad = d.dot((i1 + i2) * d);
  return 0.5 * (tr + quad) - 6.0;
}

/// Moment-matched single Gaussian of a weighted two-component sub-mixture.
inline std::pair<Vec6, Mat6> moment_match(double w1, const Vec6& mu1, const Mat6& s1, double w2,
                                          const Vec6& mu2, const Mat6& s2) {
  const double w = w1 + w2;
  const Vec6 mu = (w1 * mu1 + w2 * mu2) / w;
  const Vec6 d1 = mu1 - mu;
  const Vec6 d2 = mu2 - mu;
  const Mat6 s = (w1 * (s1 + d1 * d1.transpose()) + w2 * (s2 + d2 * d2.transpose())) / w;
  return {mu, symmetrized(s)};
}

}  // namespace detail

/// Symmetric KL divergence between two PGs restated to their midpoint chart.
inline double skl(const ProjectedGaussian& p1, const ProjectedGaussian& p2,
                  double max_angle = kDefaultFusionAngle) {
  const TangentChart chart = common_chart(p1.chart(), p2.chart(), max_angle);
  const auto [mu1, s1] = restate_moments(p1, chart);
  const auto [mu2, s2] = restate_moments(p2, chart);
  return detail::skl_gaussians(mu1, s1, mu2, s2);
}

/// Replaces two weighted components by their moment-matched single component
/// (weights add), re-centered to PG0.
inline std::pair<double, ProjectedGaussian> merge_pair(double w1, const ProjectedGaussian& p1,
                                                       double w2, const ProjectedGaussian& p2,
                                                       const McConfig& mc = {},
                                                       double max_angle = kDefaultFusionAngle) {
  const TangentChart chart = common_chart(p1.chart(), p2.chart(), max_angle);
  const auto [mu1, s1] = restate_moments(p1, chart);
  const auto [mu2, s2] = restate_moments(p2, chart);
  const auto [mu, s] = detail::moment_match(w1, mu1, s1, w2, mu2, s2);
  const auto r = detail::recenter_moments(chart, mu, s);
  return {w1 + w2, pg_new(r.chart, r.mu, r.sigma, mc)};
}

/// Weighted merge cost w1*d(p1,p') + w2*d(p',p2): the merge-bound right-hand
/// side times the combined weight. Evaluated on the midpoint chart without
/// renormalization.
inline double merge_cost(double w1, const ProjectedGaussian& p1, double w2,
                         const ProjectedGaussian& p2, double max_angle = kDefaultFusionAngle) {
  const TangentChart chart = common_chart(p1.chart(), p2.chart(), max_angle);
  const auto [mu1, s1] = restate_moments(p1, chart);
  const auto [mu2, s2] = restate_moments(p2, chart);
  const auto [mu, s] = detail::moment_match(w1, mu1, s1, w2, mu2, s2);
  return w1 * detail::skl_gaussians(mu1, s1, mu, s) + w2 * detail::skl_gaussians(mu, s, mu2, s2);
}

/// Greedy lowest-cost-first merging of chart-compatible pairs until at most
/// target_n components remain. Reported indices refer to the mixture state at
/// the time of each merge.
inline std::pair<Mpg, ReductionReport> mpg_reduce(const Mpg& m, std::size_t target_n,
                                                  const McConfig& mc = {},
                                                  double max_angle = kDefaultFusionAngle) {
  if (target_n < 1) throw Error("reduction target must be at least 1");
  std::vector<Weighted> comps = m.components();
  ReductionReport report;
  while (comps.size() > target_n) {
    bool found = false;
    std::size_t bi = 0, bj = 0;
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < comps.size(); ++i) {
      for (std::size_t j = i + 1; j < comps.size(); ++j) {
        if (!alpha_compat(comps[i].pg, comps[j].pg, max_angle)) continue;
        const double cost = merge_cost(comps[i].weight, comps[i].pg, comps[j].weight, comps[j].pg, max_angle);
        if (!found || cost < best) {
          found = true;
          best = cost;
          bi = i;
          bj = j;
        }
      }
    }
    if (!found)
      throw TargetUnreachable("no chart-compatible pair left with " + std::to_string(comps.size()) +
                              " components, target " + std::to_string(target_n));
    auto [w, pg] = merge_pair(comps[bi].weight, comps[bi].pg, comps[bj].weight, comps[bj].pg, mc, max_angle);
    report.merged.push_back({bi, bj, best});
    comps[bi] = {w, std::move(pg)};
    comps.erase(comps.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  return {Mpg(std::move(comps)), report};
}

}  // namespace mpg
