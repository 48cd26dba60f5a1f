#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirp/rng.hpp"

namespace dirp {

using Vec = std::vector<double>;

struct Topology {
  int num_cells = 0;
  int num_slices = 0;
  double bandwidth_hz = 0.0;
  double tx_power_w = 0.0;
  double noise_w = 0.0;
  // gain[k][j]: channel gain from cell j's transmitter into cell k's users.
  // Diagonal entries are the serving gains.
  std::vector<std::vector<double>> gain;
  // interference neighbourhood per cell, self excluded
  std::vector<std::vector<int>> neighbors;
};

struct SliceSpec {
  std::string name;
  double thr_req_bps = 0.0;       // phi* per user
  double delay_req_s = 0.0;       // d* per packet
  double offered_rate_bps = 0.0;  // lambda, per active user
  int max_users_per_group = 0;
  double packet_bits = 0.0;       // L
};

// Deterministic daily/weekly activity pattern, one row per slice, values in
// [0,1]. Lookup wraps, so any horizon can run against a finite table.
struct TrafficMask {
  std::vector<std::vector<double>> values;

  int period() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }

  double at(int slice, long t) const {
    const auto& row = values[static_cast<std::size_t>(slice)];
    return row[static_cast<std::size_t>(t % static_cast<long>(row.size()))];
  }
};

struct Scenario {
  std::string name;
  Topology topology;
  std::vector<SliceSpec> slices;
  TrafficMask mask;
};

// Everything the controller can observe for one step, per (cell, slice).
struct KpiReport {
  int num_cells = 0;
  int num_slices = 0;
  long t = -1;
  Vec throughput;  // per-user bps
  Vec delay;       // seconds
  Vec load;        // fraction of the cell's resources actually used
  std::vector<int> users;
  Vec demand_bps;  // offered traffic u * lambda
  Vec se;          // per-cell spectral efficiency, bps/Hz

  std::size_t at(int k, int n) const {
    return static_cast<std::size_t>(k) * static_cast<std::size_t>(num_slices) +
           static_cast<std::size_t>(n);
  }
};

inline void validate_scenario(const Scenario& sc) {
  const Topology& topo = sc.topology;
  const int K = topo.num_cells;
  const int N = topo.num_slices;
  if (K <= 0 || N <= 0) throw std::invalid_argument("scenario: empty topology");
  if (topo.bandwidth_hz <= 0 || topo.tx_power_w <= 0 || topo.noise_w <= 0)
    throw std::invalid_argument("scenario: nonpositive radio constants");
  if (static_cast<int>(topo.gain.size()) != K)
    throw std::invalid_argument("scenario: gain matrix must be K x K");
  for (const auto& row : topo.gain) {
    if (static_cast<int>(row.size()) != K)
      throw std::invalid_argument("scenario: gain matrix must be K x K");
    for (double g : row)
      if (!(g > 0.0)) throw std::invalid_argument("scenario: gains must be positive");
  }
  if (static_cast<int>(topo.neighbors.size()) != K)
    throw std::invalid_argument("scenario: neighbor list per cell required");
  for (int k = 0; k < K; ++k)
    for (int j : topo.neighbors[static_cast<std::size_t>(k)])
      if (j < 0 || j >= K || j == k)
        throw std::invalid_argument("scenario: bad neighbor id");
  if (static_cast<int>(sc.slices.size()) != N)
    throw std::invalid_argument("scenario: slice count mismatch");
  for (const auto& s : sc.slices)
    if (s.thr_req_bps <= 0 || s.delay_req_s <= 0 || s.offered_rate_bps <= 0 ||
        s.max_users_per_group <= 0 || s.packet_bits <= 0)
      throw std::invalid_argument("scenario: nonpositive slice parameter");
  if (static_cast<int>(sc.mask.values.size()) != N)
    throw std::invalid_argument("scenario: mask must have one row per slice");
  const int period = sc.mask.period();
  if (period <= 0) throw std::invalid_argument("scenario: empty mask");
  for (const auto& row : sc.mask.values) {
    if (static_cast<int>(row.size()) != period)
      throw std::invalid_argument("scenario: ragged mask rows");
    for (double v : row)
      if (!(v >= 0.0) || !(v <= 1.0)) throw std::invalid_argument("scenario: mask value outside [0,1]");
  }
}

// Surrogate network model. Per step it places users via the traffic mask,
// solves the load-coupled interference fixed point and reports per-slice
// KPIs. All randomness happens at reset (nominal user placement), so a fixed
// (scenario, seed, action sequence) replays bit-identically.
class NetworkEnv {
 public:
  static constexpr double kFixedPointTol = 1e-6;
  static constexpr int kFixedPointMaxIter = 100;

  NetworkEnv(Scenario sc, std::uint64_t seed) : sc_(std::move(sc)) {
    validate_scenario(sc_);
    reset(seed);
  }

  void reset(std::uint64_t seed) {
    const int K = sc_.topology.num_cells;
    const int N = sc_.topology.num_slices;
    std::mt19937_64 rng(substream_seed(seed, 17));
    nominal_users_.assign(static_cast<std::size_t>(K) * N, 0.0);
    // users arrive in groups; each group attaches to one site (a block of up
    // to 3 cells) and splits across the site's cells with random weights
    const int sites = (K + 2) / 3;
    for (int n = 0; n < N; ++n) {
      for (int site = 0; site < sites; ++site) {
        const int lo = site * 3;
        const int hi = std::min(lo + 3, K);
        std::vector<double> w(static_cast<std::size_t>(hi - lo));
        double sum = 0.0;
        for (auto& v : w) {
          v = 0.25 + uniform01(rng);
          sum += v;
        }
        for (int k = lo; k < hi; ++k)
          nominal_users_[static_cast<std::size_t>(k) * N + n] +=
              sc_.slices[static_cast<std::size_t>(n)].max_users_per_group *
              (w[static_cast<std::size_t>(k - lo)] / sum);
      }
    }
    clock_ = 0;
    convergence_failures_ = 0;
    // initial observation: uniform partition against the first mask column
    kpi_ = evaluate(uniform_actions(), 0);
  }

  int users_at(int k, int n, long t) const {
    const int N = sc_.topology.num_slices;
    const double u =
        sc_.mask.at(n, t) * nominal_users_[static_cast<std::size_t>(k) * N + n];
    return static_cast<int>(std::floor(u + 0.5));
  }

  KpiReport step(const std::vector<Vec>& actions) {
    kpi_ = evaluate(actions, clock_);
    clock_ += 1;
    return kpi_;
  }

  const KpiReport& kpi() const { return kpi_; }
  long clock() const { return clock_; }
  const Scenario& scenario() const { return sc_; }
  const std::vector<double>& nominal_users() const { return nominal_users_; }
  bool last_converged() const { return last_converged_; }
  int last_iterations() const { return last_iterations_; }
  long convergence_failures() const { return convergence_failures_; }

  std::vector<Vec> uniform_actions() const {
    const int K = sc_.topology.num_cells;
    const int N = sc_.topology.num_slices;
    return std::vector<Vec>(static_cast<std::size_t>(K),
                            Vec(static_cast<std::size_t>(N), 1.0 / N));
  }

 private:
  void check_action(const Vec& a, int N) const {
    if (static_cast<int>(a.size()) != N)
      throw std::invalid_argument("env: action dim mismatch");
    double sum = 0.0;
    for (double v : a) {
      if (!std::isfinite(v)) throw std::invalid_argument("env: nonfinite action");
      if (v < -1e-6) throw std::invalid_argument("env: negative slice share");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-6)
      throw std::invalid_argument("env: slice shares must sum to 1");
  }

  KpiReport evaluate(const std::vector<Vec>& actions, long t) {
    const Topology& topo = sc_.topology;
    const int K = topo.num_cells;
    const int N = topo.num_slices;
    if (static_cast<int>(actions.size()) != K)
      throw std::invalid_argument("env: need one action per cell");
    for (const auto& a : actions) check_action(a, N);

    KpiReport r;
    r.num_cells = K;
    r.num_slices = N;
    r.t = t;
    r.throughput.assign(static_cast<std::size_t>(K) * N, 0.0);
    r.delay.assign(static_cast<std::size_t>(K) * N, 0.0);
    r.load.assign(static_cast<std::size_t>(K) * N, 0.0);
    r.users.assign(static_cast<std::size_t>(K) * N, 0);
    r.demand_bps.assign(static_cast<std::size_t>(K) * N, 0.0);
    r.se.assign(static_cast<std::size_t>(K), 0.0);

    std::vector<double> demand(static_cast<std::size_t>(K) * N, 0.0);
    for (int k = 0; k < K; ++k)
      for (int n = 0; n < N; ++n) {
        const int u = users_at(k, n, t);
        r.users[r.at(k, n)] = u;
        demand[r.at(k, n)] = u * sc_.slices[static_cast<std::size_t>(n)].offered_rate_bps;
        r.demand_bps[r.at(k, n)] = demand[r.at(k, n)];
      }

    // load-coupled fixed point: cell loads raise neighbor interference which
    // lowers SE which raises the load needed to carry the same traffic.
    // Starting from zero load the iteration is monotone nondecreasing and
    // bounded by the allocations, so it settles.
    const double B = topo.bandwidth_hz;
    const double P = topo.tx_power_w;
    std::vector<double> load(static_cast<std::size_t>(K) * N, 0.0);
    std::vector<double> se(static_cast<std::size_t>(K), 0.0);
    last_converged_ = false;
    last_iterations_ = 0;
    for (int it = 0; it < kFixedPointMaxIter; ++it) {
      last_iterations_ = it + 1;
      double delta = 0.0;
      std::vector<double> rho(static_cast<std::size_t>(K), 0.0);
      for (int j = 0; j < K; ++j)
        for (int n = 0; n < N; ++n) rho[static_cast<std::size_t>(j)] += load[r.at(j, n)];
      for (int k = 0; k < K; ++k) {
        double interf = 0.0;
        for (int j = 0; j < K; ++j)
          if (j != k)
            interf += rho[static_cast<std::size_t>(j)] * P *
                      topo.gain[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
        const double sinr =
            P * topo.gain[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] /
            (interf + topo.noise_w);
        se[static_cast<std::size_t>(k)] = std::log2(1.0 + sinr);
        for (int n = 0; n < N; ++n) {
          const double a = std::max(actions[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)], 0.0);
          const double d = demand[r.at(k, n)];
          const double want = d / (B * se[static_cast<std::size_t>(k)]);
          const double next = std::min(a, want);
          delta = std::max(delta, std::fabs(next - load[r.at(k, n)]));
          load[r.at(k, n)] = next;
        }
      }
      if (delta < kFixedPointTol) {
        last_converged_ = true;
        break;
      }
    }
    if (!last_converged_) convergence_failures_ += 1;

    for (int k = 0; k < K; ++k) {
      r.se[static_cast<std::size_t>(k)] = se[static_cast<std::size_t>(k)];
      for (int n = 0; n < N; ++n) {
        const SliceSpec& sl = sc_.slices[static_cast<std::size_t>(n)];
        const std::size_t i = r.at(k, n);
        r.load[i] = load[i];
        const int u = r.users[i];
        if (u == 0) {
          // idle slice reports its requirements, i.e. neutral satisfaction
          r.throughput[i] = sl.thr_req_bps;
          r.delay[i] = sl.delay_req_s;
          continue;
        }
        const double a = std::max(actions[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)], 0.0);
        const double served = load[i] * B * se[static_cast<std::size_t>(k)];
        const double phi = served / u;
        r.throughput[i] = phi;
        const double cap = a * B * se[static_cast<std::size_t>(k)];
        const double rho_util =
            cap > 0.0 ? demand[i] / cap : std::numeric_limits<double>::infinity();
        const double service_time = sl.packet_bits / std::max(phi, 1e-12);
        const double idle = std::max(1.0 - std::min(rho_util, 1.0 - 1e-3), 1e-3);
        r.delay[i] = service_time / idle;
      }
    }
    return r;
  }

  Scenario sc_;
  std::vector<double> nominal_users_;
  KpiReport kpi_;
  long clock_ = 0;
  bool last_converged_ = false;
  int last_iterations_ = 0;
  long convergence_failures_ = 0;
};

namespace detail {
// smooth diurnal bump, value 1 at `peak_hour`, 0 twelve hours away
inline double diurnal(double hour, double peak_hour, double sharpness) {
  const double c = 0.5 * (1.0 + std::cos(2.0 * M_PI * (hour - peak_hour) / 24.0));
  return std::pow(c, sharpness);
}

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }
}  // namespace detail

// 12-cell, 4-slice reference layout: four 3-cell sites on a ring. Cells 2
// and 6 sit in unfavourable geometry (weaker serving gain, stronger received
// interference), so their partitions must deviate from the rest.
inline Scenario default_scenario() {
  Scenario sc;
  sc.name = "default";
  const int K = 12, N = 4;
  Topology& topo = sc.topology;
  topo.num_cells = K;
  topo.num_slices = N;
  topo.bandwidth_hz = 20e6;
  topo.tx_power_w = 40.0;
  topo.noise_w = 0.2;
  topo.gain.assign(K, std::vector<double>(K, 0.0));
  const int sites = 4;
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j) {
      if (k == j) {
        topo.gain[k][j] = 0.5;
        continue;
      }
      const int sk = k / 3, sj = j / 3;
      int ring = std::abs(sk - sj);
      ring = std::min(ring, sites - ring);
      if (sk == sj)
        topo.gain[k][j] = 0.02;
      else if (ring == 1)
        topo.gain[k][j] = 0.012;
      else
        topo.gain[k][j] = 0.004;
    }
  for (int k : {2, 6}) {
    topo.gain[k][k] = 0.35;
    for (int j = 0; j < K; ++j)
      if (j != k) topo.gain[k][j] *= 1.5;
  }
  topo.neighbors.assign(K, {});
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      const int sk = k / 3, sj = j / 3;
      int ring = std::abs(sk - sj);
      ring = std::min(ring, sites - ring);
      if (ring <= 1) topo.neighbors[k].push_back(j);
    }

  sc.slices = {
      {"video", 4e6, 1.0e-3, 4e6, 10, 2400.0},
      {"web", 1e6, 1.5e-3, 1e6, 10, 450.0},
      {"stream", 3e6, 2.0e-3, 3e6, 10, 2400.0},
      {"iot", 0.5e6, 1.0e-3, 0.5e6, 10, 100.0},
  };

  // three weeks at 15 min resolution, weekday/weekend modulation
  const int period = 96 * 21;
  sc.mask.values.assign(N, std::vector<double>(period, 0.0));
  const double peak[N] = {14.0, 20.0, 11.0, 17.0};
  const double sharp[N] = {2.0, 1.5, 2.5, 1.2};
  for (int t = 0; t < period; ++t) {
    const int day = t / 96;
    const double hour = (t % 96) / 4.0;
    const double w = (day % 7 < 5) ? 1.0 : 0.65;
    for (int n = 0; n < N; ++n)
      sc.mask.values[n][t] =
          detail::clamp01((0.12 + 0.95 * detail::diurnal(hour, peak[n], sharp[n])) * w);
  }
  return sc;
}

// 3-cell, 2-slice scenario sized for quick desk runs: one site, strong
// mutual coupling, a delay-critical premium slice against a bulk slice.
inline Scenario small_scenario() {
  Scenario sc;
  sc.name = "small";
  const int K = 3, N = 2;
  Topology& topo = sc.topology;
  topo.num_cells = K;
  topo.num_slices = N;
  topo.bandwidth_hz = 20e6;
  topo.tx_power_w = 40.0;
  topo.noise_w = 0.2;
  // three distinct radio conditions: cell 0 well isolated, cell 2 with a
  // weak own link under heavy incoming interference
  topo.gain = {{0.55, 0.05, 0.07},
               {0.09, 0.46, 0.09},
               {0.12, 0.12, 0.38}};
  topo.neighbors = {{1, 2}, {0, 2}, {0, 1}};

  // bulk users offer more traffic than their SLA asks for, so pushing
  // resources at them keeps paying off beyond the requirement
  sc.slices = {
      {"premium", 4e6, 1.0e-3, 4e6, 24, 2400.0},
      {"bulk", 1e6, 1.5e-3, 1.3e6, 36, 300.0},
  };

  const int period = 96;
  sc.mask.values.assign(N, std::vector<double>(period, 0.0));
  for (int t = 0; t < period; ++t) {
    const double hour = t / 4.0;
    sc.mask.values[0][t] = detail::clamp01(0.2 + 0.95 * detail::diurnal(hour, 13.0, 1.5));
    sc.mask.values[1][t] = detail::clamp01(0.15 + 0.9 * detail::diurnal(hour, 19.0, 1.2));
  }
  return sc;
}

}  // namespace dirp
