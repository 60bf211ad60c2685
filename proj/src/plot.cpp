// Copyright 2026 The GAS Curriculum Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gas/plot.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <fmt/format.h>

#include "gas/errors.hpp"

namespace gas {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

double x_of(const AggregatePoint& p, XColumn x) {
  switch (x) {
    case XColumn::kEnvSteps: return p.env_steps;
    case XColumn::kModelUpdates: return p.model_updates;
    case XColumn::kIndex: break;
  }
  return p.x;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round tick spacing covering [lo, hi] with about n ticks.
double tick_step(double lo, double hi, int n) {
  const double raw = (hi - lo) / n;
  if (raw <= 0) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace

std::string curve_label(const std::string& path) {
  std::string stem = std::filesystem::path(path).stem().string();
  const std::string suffix = "_aggregate";
  if (stem.size() > suffix.size() &&
      stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0) {
    stem.resize(stem.size() - suffix.size());
  }
  return stem;
}

std::string render_svg(const std::vector<Curve>& curves, const PlotOptions& opt) {
  if (curves.empty()) throw ConfigError("plot: no curves");
  for (const auto& c : curves) {
    if (c.aggregate.x_axis != curves.front().aggregate.x_axis ||
        c.aggregate.y_name != curves.front().aggregate.y_name) {
      throw ConfigError(fmt::format(
          "plot: '{}' has axes ({}, {}) but '{}' has ({}, {})", c.label,
          c.aggregate.x_axis, c.aggregate.y_name, curves.front().label,
          curves.front().aggregate.x_axis, curves.front().aggregate.y_name));
    }
  }
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  bool any = false;
  for (const auto& c : curves) {
    for (const auto& p : c.aggregate.points) {
      const double x = x_of(p, opt.x);
      if (!any) {
        x_lo = x_hi = x;
        y_lo = p.mean - p.stderr_;
        y_hi = p.mean + p.stderr_;
        any = true;
      }
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, p.mean - p.stderr_);
      y_hi = std::max(y_hi, p.mean + p.stderr_);
    }
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  const double left = 70, right = 170, top = 40, bottom = 50;
  const double pw = opt.width - left - right;
  const double ph = opt.height - top - bottom;
  auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * ph; };

  std::string x_name = curves.front().aggregate.x_axis;
  if (opt.x == XColumn::kEnvSteps) x_name = "env_steps";
  if (opt.x == XColumn::kModelUpdates) x_name = "model_updates";

  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      opt.width, opt.height, opt.width, opt.height);
  s += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", opt.width, opt.height);
  if (!opt.title.empty()) {
    s += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                     left + pw / 2, escape(opt.title));
  }
  // Axes and ticks.
  s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
                   left, top, pw, ph);
  const double xs = tick_step(x_lo, x_hi, 6);
  for (double t = std::ceil(x_lo / xs) * xs; t <= x_hi + 1e-9 * xs; t += xs) {
    s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#ddd\"/>"
                     "<text x=\"{0:.2f}\" y=\"{3}\" text-anchor=\"middle\">{4:g}</text>\n",
                     sx(t), top, top + ph, top + ph + 16, t);
  }
  const double ys = tick_step(y_lo, y_hi, 5);
  for (double t = std::ceil(y_lo / ys) * ys; t <= y_hi + 1e-9 * ys; t += ys) {
    s += fmt::format("<line x1=\"{1}\" y1=\"{0:.2f}\" x2=\"{2}\" y2=\"{0:.2f}\" stroke=\"#ddd\"/>"
                     "<text x=\"{3}\" y=\"{0:.2f}\" text-anchor=\"end\" dy=\"4\">{4:g}</text>\n",
                     sy(t), left, left + pw, left - 6, t);
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", left + pw / 2,
                   opt.height - 12, escape(x_name));
  s += fmt::format("<text transform=\"translate(18,{}) rotate(-90)\" text-anchor=\"middle\">{}</text>\n",
                   top + ph / 2, escape(curves.front().aggregate.y_name));

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& pts = curves[i].aggregate.points;
    const char* color = kPalette[i % std::size(kPalette)];
    if (!pts.empty()) {
      std::string band;
      for (const auto& p : pts) {
        band += fmt::format("{:.2f},{:.2f} ", sx(x_of(p, opt.x)), sy(p.mean + p.stderr_));
      }
      for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
        band += fmt::format("{:.2f},{:.2f} ", sx(x_of(*it, opt.x)), sy(it->mean - it->stderr_));
      }
      s += fmt::format("<polygon class=\"band\" points=\"{}\" fill=\"{}\" fill-opacity=\"0.2\" stroke=\"none\"/>\n",
                       band, color);
      std::string line;
      for (const auto& p : pts) {
        line += fmt::format("{:.2f},{:.2f} ", sx(x_of(p, opt.x)), sy(p.mean));
      }
      s += fmt::format("<polyline class=\"mean\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                       line, color);
    }
    const double ly = top + 14 + 18 * static_cast<double>(i);
    s += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"3\"/>"
                     "<text class=\"legend\" x=\"{}\" y=\"{}\" dy=\"4\">{}</text>\n",
                     left + pw + 12, ly, left + pw + 32, ly, color, left + pw + 38, ly,
                     escape(curves[i].label));
  }
  s += "</svg>\n";
  return s;
}

}  // namespace gas
