#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dirp/env.hpp"

namespace dirp {

enum class RewardKind { max_min, log_utility };

inline const char* reward_name(RewardKind k) {
  return k == RewardKind::max_min ? "maxmin" : "log";
}

inline RewardKind reward_from_name(const std::string& s) {
  if (s == "maxmin") return RewardKind::max_min;
  if (s == "log") return RewardKind::log_utility;
  throw std::runtime_error("unknown reward kind: " + s + " (use maxmin or log)");
}

// Scales that keep state entries O(1) across scenarios.
struct StateScales {
  double thr = 1.0;
  double users = 1.0;
  double delay = 1.0;

  static StateScales from(const std::vector<SliceSpec>& slices) {
    StateScales s;
    s.thr = s.users = s.delay = 0.0;
    for (const auto& sl : slices) {
      s.thr = std::max(s.thr, sl.thr_req_bps);
      s.users = std::max(s.users, static_cast<double>(sl.max_users_per_group));
      s.delay = std::max(s.delay, sl.delay_req_s);
    }
    s.thr = std::max(s.thr, 1e-12);
    s.users = std::max(s.users, 1e-12);
    s.delay = std::max(s.delay, 1e-12);
    return s;
  }
};

inline int local_state_dim(int num_slices) { return 5 * num_slices; }

// Local observation of cell k, slice-major quintuples:
// (throughput, load, users, thr requirement, delay requirement), normalized.
inline Vec build_local_state(const KpiReport& kpi, int k, const std::vector<SliceSpec>& slices) {
  const StateScales sc = StateScales::from(slices);
  const int N = kpi.num_slices;
  Vec s(static_cast<std::size_t>(local_state_dim(N)));
  for (int n = 0; n < N; ++n) {
    const std::size_t i = kpi.at(k, n);
    const std::size_t base = static_cast<std::size_t>(5 * n);
    s[base + 0] = kpi.throughput[i] / sc.thr;
    s[base + 1] = kpi.load[i];
    s[base + 2] = kpi.users[i] / sc.users;
    s[base + 3] = slices[static_cast<std::size_t>(n)].thr_req_bps / sc.thr;
    s[base + 4] = slices[static_cast<std::size_t>(n)].delay_req_s / sc.delay;
  }
  for (double v : s)
    if (!std::isfinite(v)) throw std::invalid_argument("state: nonfinite kpi entry");
  return s;
}

// Concatenation of all local states, the centralized controller's view.
inline Vec build_global_state(const KpiReport& kpi, const std::vector<SliceSpec>& slices) {
  Vec g;
  g.reserve(static_cast<std::size_t>(kpi.num_cells) * local_state_dim(kpi.num_slices));
  for (int k = 0; k < kpi.num_cells; ++k) {
    const Vec s = build_local_state(kpi, k, slices);
    g.insert(g.end(), s.begin(), s.end());
  }
  return g;
}

struct NeighborMessage {
  Vec mean_load;           // one entry per slice
  bool degenerate = false; // true when the neighbor set is empty
};

// Per-slice mean load over the neighbor set. Iteration runs over a sorted
// copy of the ids so the result does not depend on list order.
inline NeighborMessage extract_message(const KpiReport& kpi, int k,
                                       const std::vector<int>& neighbors) {
  const int N = kpi.num_slices;
  NeighborMessage msg;
  msg.mean_load.assign(static_cast<std::size_t>(N), 0.0);
  if (neighbors.empty()) {
    msg.degenerate = true;
    return msg;
  }
  std::vector<int> ids = neighbors;
  std::sort(ids.begin(), ids.end());
  for (int j : ids) {
    if (j < 0 || j >= kpi.num_cells || j == k)
      throw std::invalid_argument("message: bad neighbor id");
    for (int n = 0; n < N; ++n) msg.mean_load[static_cast<std::size_t>(n)] += kpi.load[kpi.at(j, n)];
  }
  for (auto& v : msg.mean_load) v /= static_cast<double>(ids.size());
  return msg;
}

// Raw satisfaction ratios; delay is floored to dodge division blowups.
struct SatRatios {
  double thr = 0.0;
  double delay = 0.0;
};

inline SatRatios sat_ratios(const KpiReport& kpi, int k, int n,
                            const std::vector<SliceSpec>& slices) {
  const std::size_t i = kpi.at(k, n);
  if (!std::isfinite(kpi.throughput[i]) || !std::isfinite(kpi.delay[i]))
    throw std::invalid_argument("reward: nonfinite kpi");
  SatRatios r;
  r.thr = kpi.throughput[i] / slices[static_cast<std::size_t>(n)].thr_req_bps;
  r.delay = slices[static_cast<std::size_t>(n)].delay_req_s / std::max(kpi.delay[i], 1e-6);
  return r;
}

inline double capped01(double v) { return std::min(v, 1.0); }

inline double local_reward(const KpiReport& kpi, int k, const std::vector<SliceSpec>& slices,
                           RewardKind kind) {
  const int N = kpi.num_slices;
  if (kind == RewardKind::max_min) {
    double worst = 1.0;
    for (int n = 0; n < N; ++n) {
      const SatRatios r = sat_ratios(kpi, k, n, slices);
      worst = std::min(worst, std::min(r.thr, r.delay));
    }
    return std::max(worst, 0.0);
  }
  double acc = 0.0;
  for (int n = 0; n < N; ++n) {
    const SatRatios r = sat_ratios(kpi, k, n, slices);
    acc += std::log2(std::min(r.thr, r.delay) + 1.0);
  }
  return acc / N;
}

// Network objective: the bottleneck cell under max-min, the average under
// the log utility.
inline double global_reward(const KpiReport& kpi, const std::vector<SliceSpec>& slices,
                            RewardKind kind) {
  double acc = kind == RewardKind::max_min ? 1.0 : 0.0;
  for (int k = 0; k < kpi.num_cells; ++k) {
    const double r = local_reward(kpi, k, slices, kind);
    if (kind == RewardKind::max_min)
      acc = std::min(acc, r);
    else
      acc += r;
  }
  return kind == RewardKind::max_min ? acc : acc / kpi.num_cells;
}

}  // namespace dirp
