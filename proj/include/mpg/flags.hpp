#pragma once

#include <string>
#include <vector>

#include "mpg/format.hpp"
#include "mpg/mixture.hpp"

namespace mpg {

/// One drawn pose: foot at the position, pole along the rotated z-axis,
/// pennant halfway up the pole pointing along the rotated x-axis.
struct Flag {
  Vec3 foot = Vec3::Zero();
  Vec3 pole_tip = Vec3::Zero();
  Vec3 pennant_tip = Vec3::Zero();
  std::string color;
};

struct FlagSet {
  std::vector<Flag> flags;
  std::string color = "#1f77b4";
};

/// Draws n poses from the mixture and builds their flags.
inline FlagSet export_flags(const Mpg& m, std::size_t n, std::uint64_t seed, double flag_scale,
                            const std::string& color = "#1f77b4") {
  if (n < 1) throw Error("export_flags needs at least one flag");
  FlagSet set;
  set.color = color;
  set.flags.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const RigidMotion pose = mpg_sample(m, rng);
    Flag f;
    f.color = color;
    f.foot = pose.translation();
    const Vec3 up = rotate_point(pose.rotation(), Vec3(0, 0, 1));
    const Vec3 front = rotate_point(pose.rotation(), Vec3(1, 0, 0));
    f.pole_tip = f.foot + flag_scale * up;
    f.pennant_tip = f.foot + 0.5 * flag_scale * up + 0.5 * flag_scale * front;
    set.flags.push_back(std::move(f));
  }
  return set;
}

enum class SvgView { kXY, kXZ, kYZ };

inline SvgView svg_view_from_string(const std::string& s) {
  if (s == "xy") return SvgView::kXY;
  if (s == "xz") return SvgView::kXZ;
  if (s == "yz") return SvgView::kYZ;
  throw Error("unknown view \"" + s + "\" (use xy, xz or yz)");
}

namespace detail {

inline Eigen::Vector2d svg_project(const Vec3& p, SvgView view) {
  switch (view) {
    case SvgView::kXY: return {p[0], p[1]};
    case SvgView::kXZ: return {p[0], p[2]};
    default: return {p[1], p[2]};
  }
}

}  // namespace detail

/// Orthographic flag plot as a standalone SVG document, one color per flag
/// set (a flag's own color wins when set). Deterministic output.
inline std::string render_svg(const std::vector<FlagSet>& sets, SvgView view = SvgView::kXY,
                              double size = 640.0) {
  double lo_x = 0.0, hi_x = 1.0, lo_y = 0.0, hi_y = 1.0;
  bool first = true;
  for (const auto& set : sets) {
    for (const auto& f : set.flags) {
      for (const Vec3* p : {&f.foot, &f.pole_tip, &f.pennant_tip}) {
        const Eigen::Vector2d q = detail::svg_project(*p, view);
        if (first) {
          lo_x = hi_x = q[0];
          lo_y = hi_y = q[1];
          first = false;
        } else {
          lo_x = std::min(lo_x, q[0]);
          hi_x = std::max(hi_x, q[0]);
          lo_y = std::min(lo_y, q[1]);
          hi_y = std::max(hi_y, q[1]);
        }
      }
    }
  }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
  const double margin = 0.05 * span;
  const double scale = size / (span + 2.0 * margin);
  auto map = [&](const Vec3& p) {
    const Eigen::Vector2d q = detail::svg_project(p, view);
    // SVG y grows downward
    return Eigen::Vector2d((q[0] - lo_x + margin) * scale, size - (q[1] - lo_y + margin) * scale);
  };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + double_to_string(size) +
                    "\" height=\"" + double_to_string(size) + "\" viewBox=\"0 0 " +
                    double_to_string(size) + " " + double_to_string(size) + "\">\n";
  for (const auto& set : sets) {
    for (const auto& f : set.flags) {
      const std::string& color = f.color.empty() ? set.color : f.color;
      const Eigen::Vector2d foot = map(f.foot);
      const Eigen::Vector2d tip = map(f.pole_tip);
      const Eigen::Vector2d mid = map(0.5 * (f.foot + f.pole_tip));
      const Eigen::Vector2d pennant = map(f.pennant_tip);
      svg += "  <polyline points=\"" + double_to_string(foot[0]) + "," + double_to_string(foot[1]) +
             " " + double_to_string(tip[0]) + "," + double_to_string(tip[1]) +
             "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
      svg += "  <polyline points=\"" + double_to_string(mid[0]) + "," + double_to_string(mid[1]) +
             " " + double_to_string(pennant[0]) + "," + double_to_string(pennant[1]) +
             "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1\"/>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace mpg
