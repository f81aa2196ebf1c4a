#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "curveflow/frames_io.hpp"

namespace curveflow {

/// World-space rectangle shown by every frame of one rendering.
struct Viewport {
  double xmin = -1.0;
  double ymin = -1.0;
  double xmax = 1.0;
  double ymax = 1.0;
};

struct SvgStyle {
  int width = 640;  ///< pixels; height follows the viewport aspect ratio
  int samples_per_span = 64;
  bool markers = true;  ///< draw the control polygon's points
  double stroke = 2.0;
};

/// Points on the curve, samples_per_span per knot span, first point not repeated.
inline std::vector<Vec2> sample_closed_curve(const ClosedBSplineCurve& curve, int samples_per_span) {
  const KnotVector& kv = curve.knots();
  const int total = kv.spans() * samples_per_span;
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(total));
  for (int k = 0; k < total; ++k) {
    const double z = kv.a() + (kv.b() - kv.a()) * k / total;
    out.push_back(curve_eval(curve, z, 0));
  }
  return out;
}

/// Bounding box of the sampled curve and its control points, grown by margin times the extent.
inline Viewport viewport_for(const ClosedBSplineCurve& curve, double margin = 0.1) {
  Viewport v{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  auto grow = [&v](const Vec2& p) {
    v.xmin = std::min(v.xmin, p.x);
    v.ymin = std::min(v.ymin, p.y);
    v.xmax = std::max(v.xmax, p.x);
    v.ymax = std::max(v.ymax, p.y);
  };
  for (const auto& p : sample_closed_curve(curve, 64)) grow(p);
  for (const auto& p : curve.control_points()) grow(p);
  const double extent = std::max({v.xmax - v.xmin, v.ymax - v.ymin, 1e-12});
  const double pad = margin * extent;
  return {v.xmin - pad, v.ymin - pad, v.xmax + pad, v.ymax + pad};
}

namespace detail {

inline std::string fixed(double v, int digits = 3) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace detail

inline std::string render_svg(const Frame& frame, const Viewport& view, const SvgStyle& style = {}) {
  using detail::fixed;
  const double w = view.xmax - view.xmin;
  const double h = view.ymax - view.ymin;
  const double px = style.width / w;
  const int height = std::max(1, static_cast<int>(std::lround(h * px)));
  auto sx = [&](double x) { return (x - view.xmin) * px; };
  auto sy = [&](double y) { return (view.ymax - y) * px; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) + "\" height=\"" +
       std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(style.width) + " " + std::to_string(height) +
       "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<path fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"" + fixed(style.stroke, 2) +
       "\" stroke-linejoin=\"round\" d=\"";
  const auto pts = sample_closed_curve(frame.curve, style.samples_per_span);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s += i == 0 ? "M" : " L";
    s += fixed(sx(pts[i].x)) + " " + fixed(sy(pts[i].y));
  }
  s += " Z\"/>\n";
  if (style.markers) {
    for (const auto& p : frame.curve.control_points()) {
      s += "<circle cx=\"" + fixed(sx(p.x)) + "\" cy=\"" + fixed(sy(p.y)) +
           "\" r=\"3\" fill=\"#d94f30\" fill-opacity=\"0.8\"/>\n";
    }
  }
  char label[160];
  std::snprintf(label, sizeof label, "n=%ld t=%.4f N=%d E=%.6f", frame.n, frame.t, frame.curve.size(), frame.energy);
  s += "<text x=\"8\" y=\"18\" font-family=\"monospace\" font-size=\"13\">" + std::string(label) + "</text>\n";
  s += "</svg>\n";
  return s;
}

/// Writes frame_<n>.svg for every k-th frame and the last one; returns the paths written.
inline std::vector<std::string> write_svg_frames(const std::vector<Frame>& frames, const std::string& dir, int every,
                                                 const SvgStyle& style = {}) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  if (frames.empty()) return written;
  if (every < 1) throw std::invalid_argument("write_svg_frames: every must be at least 1");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FrameIoError(dir + ": " + ec.message());
  const Viewport view = viewport_for(frames.front().curve);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (i % static_cast<std::size_t>(every) != 0 && i + 1 != frames.size()) continue;
    char name[40];
    std::snprintf(name, sizeof name, "frame_%06ld.svg", frames[i].n);
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream out(path);
    if (!out) throw FrameIoError(path + ": cannot open for writing");
    out << render_svg(frames[i], view, style);
    out.close();
    if (out.fail()) throw FrameIoError(path + ": write failed");
    written.push_back(path);
  }
  return written;
}

}  // namespace curveflow
