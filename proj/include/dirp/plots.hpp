#pragma once

#include <algorithm>

#include "dirp/metrics.hpp"
#include "dirp/svg.hpp"

namespace dirp {

namespace detail {

struct StepSeries {
  std::vector<long> t;
  Vec global;
  std::vector<PhaseTag> phase;
};

// one entry per timestamp; rows arrive grouped by t
inline StepSeries per_step(const MetricsLog& log) {
  StepSeries s;
  long last = -1;
  bool first = true;
  for (const auto& r : log.rows) {
    if (first || r.t != last) {
      s.t.push_back(r.t);
      s.global.push_back(r.global_reward);
      s.phase.push_back(r.phase);
      last = r.t;
      first = false;
    }
  }
  return s;
}

inline std::size_t plot_stride(std::size_t n, std::size_t cap = 800) {
  return n <= cap ? 1 : (n + cap - 1) / cap;
}

}  // namespace detail

// Raw per-step global reward plus a trailing moving average.
inline std::string reward_curve_svg(const MetricsLog& log, int window = 50,
                                    const std::string& title = "global reward") {
  const detail::StepSeries s = detail::per_step(log);
  PlotFrame f;
  SvgCanvas svg(f.width, f.height);
  if (s.t.empty()) {
    svg.text(f.width / 2, f.height / 2, "no data", 13, "middle");
    return svg.str();
  }

  Vec ma(s.global.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.global.size(); ++i) {
    acc += s.global[i];
    if (i >= static_cast<std::size_t>(window)) acc -= s.global[i - static_cast<std::size_t>(window)];
    ma[i] = acc / static_cast<double>(std::min<std::size_t>(i + 1, static_cast<std::size_t>(window)));
  }

  f.x0 = static_cast<double>(s.t.front());
  f.x1 = static_cast<double>(s.t.back());
  if (f.x1 == f.x0) f.x1 = f.x0 + 1;
  f.y0 = 0.0;
  f.y1 = std::max(1.0, *std::max_element(s.global.begin(), s.global.end())) * 1.02;
  f.axes(svg, "step", "reward", title);

  for (std::size_t i = 1; i < s.phase.size(); ++i)
    if (s.phase[i] != s.phase[i - 1])
      svg.line(f.px(static_cast<double>(s.t[i])), f.py(f.y0), f.px(static_cast<double>(s.t[i])),
               f.py(f.y1), "#cccccc", 1.0);

  const std::size_t stride = detail::plot_stride(s.t.size());
  std::vector<std::pair<double, double>> raw, avg;
  for (std::size_t i = 0; i < s.t.size(); i += stride) {
    raw.emplace_back(f.px(static_cast<double>(s.t[i])), f.py(s.global[i]));
    avg.emplace_back(f.px(static_cast<double>(s.t[i])), f.py(ma[i]));
  }
  svg.polyline(raw, "#9ecae1", 1.0);
  svg.polyline(avg, plot_palette()[0], 2.0);
  svg.text(f.width - f.mr - 4, f.mt + 12, "ma-" + std::to_string(window), 10, "end");
  return svg.str();
}

// Survival curve P(satisfaction >= x) per slice over the eval segment, so
// every curve starts at (0, 1) and better schemes stay high longer.
inline std::string satisfaction_survival_svg(const MetricsLog& log, int num_slices,
                                             const std::string& title = "eval satisfaction") {
  PlotFrame f;
  f.x1 = 1.02;
  f.y1 = 1.02;
  SvgCanvas svg(f.width, f.height);
  f.axes(svg, "satisfaction level x", "P(sat >= x)", title);

  for (int n = 0; n < num_slices; ++n) {
    Vec v;
    for (const auto& r : log.rows)
      if (is_eval_phase(r.phase) && r.slice == n) v.push_back(std::min(r.thr_sat, r.delay_sat));
    const std::string& color = plot_palette()[static_cast<std::size_t>(n) % plot_palette().size()];
    svg.line(f.width - f.mr - 64, f.mt + 14 + 14 * n, f.width - f.mr - 48, f.mt + 14 + 14 * n,
             color, 2.0);
    svg.text(f.width - f.mr - 44, f.mt + 18 + 14 * n, "slice " + std::to_string(n), 10);
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    std::vector<std::pair<double, double>> pts;
    pts.emplace_back(f.px(0.0), f.py(1.0));
    const std::size_t stride = detail::plot_stride(m, 200);
    for (std::size_t i = 0; i < m; i += stride) {
      const double surv = static_cast<double>(m - i) / static_cast<double>(m);
      pts.emplace_back(f.px(v[i]), f.py(surv));
      pts.emplace_back(f.px(v[i]), f.py(static_cast<double>(m - std::min(i + stride, m)) /
                                        static_cast<double>(m)));
    }
    pts.emplace_back(f.px(v.back()), f.py(1.0 / static_cast<double>(m)));
    svg.polyline(pts, color, 1.8);
  }
  return svg.str();
}

// One cell's allocation over time as stacked bands, with the per-slice
// resource load drawn on top of its band share.
inline std::string action_traffic_svg(const MetricsLog& log, int cell, int num_slices,
                                      const std::string& title = "allocation vs load") {
  std::vector<long> ts;
  std::vector<Vec> act, load;
  long last = -1;
  bool first = true;
  for (const auto& r : log.rows) {
    if (r.cell != cell) continue;
    if (first || r.t != last) {
      ts.push_back(r.t);
      act.emplace_back(static_cast<std::size_t>(num_slices), 0.0);
      load.emplace_back(static_cast<std::size_t>(num_slices), 0.0);
      last = r.t;
      first = false;
    }
    act.back()[static_cast<std::size_t>(r.slice)] = r.action;
    load.back()[static_cast<std::size_t>(r.slice)] = r.load;
  }

  PlotFrame f;
  SvgCanvas svg(f.width, f.height);
  if (ts.empty()) {
    svg.text(f.width / 2, f.height / 2, "no data", 13, "middle");
    return svg.str();
  }
  f.x0 = static_cast<double>(ts.front());
  f.x1 = static_cast<double>(ts.back());
  if (f.x1 == f.x0) f.x1 = f.x0 + 1;
  f.y1 = 1.02;
  f.axes(svg, "step", "share of cell " + std::to_string(cell), title);

  const std::size_t stride = detail::plot_stride(ts.size());
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ts.size(); i += stride) idx.push_back(i);

  Vec lower(idx.size(), 0.0);
  for (int n = 0; n < num_slices; ++n) {
    const std::string& color = plot_palette()[static_cast<std::size_t>(n) % plot_palette().size()];
    std::vector<std::pair<double, double>> poly;
    Vec upper(idx.size(), 0.0);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      upper[j] = lower[j] + act[idx[j]][static_cast<std::size_t>(n)];
      poly.emplace_back(f.px(static_cast<double>(ts[idx[j]])), f.py(upper[j]));
    }
    for (std::size_t j = idx.size(); j-- > 0;)
      poly.emplace_back(f.px(static_cast<double>(ts[idx[j]])), f.py(lower[j]));
    svg.polygon(poly, color, 0.35);

    std::vector<std::pair<double, double>> used;
    for (std::size_t j = 0; j < idx.size(); ++j)
      used.emplace_back(f.px(static_cast<double>(ts[idx[j]])),
                        f.py(lower[j] + load[idx[j]][static_cast<std::size_t>(n)]));
    svg.polyline(used, color, 1.2);

    svg.line(f.ml + 8, f.mt + 14 + 14 * n, f.ml + 24, f.mt + 14 + 14 * n, color, 6.0);
    svg.text(f.ml + 28, f.mt + 18 + 14 * n, "slice " + std::to_string(n), 10);
    lower = upper;
  }
  return svg.str();
}

}  // namespace dirp
