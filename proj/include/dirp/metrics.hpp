#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dirp {

enum class PhaseTag { expl, train, eval, gen_expl, gen_train, spec_expl, spec_train, spec_eval };

inline const char* phase_name(PhaseTag p) {
  switch (p) {
    case PhaseTag::expl: return "expl";
    case PhaseTag::train: return "train";
    case PhaseTag::eval: return "eval";
    case PhaseTag::gen_expl: return "gen_expl";
    case PhaseTag::gen_train: return "gen_train";
    case PhaseTag::spec_expl: return "spec_expl";
    case PhaseTag::spec_train: return "spec_train";
    case PhaseTag::spec_eval: return "spec_eval";
  }
  return "?";
}

inline PhaseTag phase_from_name(const std::string& s) {
  for (PhaseTag p : {PhaseTag::expl, PhaseTag::train, PhaseTag::eval, PhaseTag::gen_expl,
                     PhaseTag::gen_train, PhaseTag::spec_expl, PhaseTag::spec_train,
                     PhaseTag::spec_eval})
    if (s == phase_name(p)) return p;
  throw std::runtime_error("metrics: unknown phase label " + s);
}

// true for the rows of a specialist stage (or a plain run), i.e. everything
// after a generalist pretraining stage
inline bool is_specialist_phase(PhaseTag p) {
  return p != PhaseTag::gen_expl && p != PhaseTag::gen_train;
}

inline bool is_eval_phase(PhaseTag p) { return p == PhaseTag::eval || p == PhaseTag::spec_eval; }

struct MetricsRow {
  long t = 0;
  PhaseTag phase = PhaseTag::expl;
  int cell = 0;
  int slice = 0;
  double action = 0.0;
  double load = 0.0;
  double thr_sat = 0.0;    // capped at 1
  double delay_sat = 0.0;  // capped at 1
  double local_reward = 0.0;
  double global_reward = 0.0;
};

struct MetricsLog {
  std::vector<MetricsRow> rows;

  void append(MetricsLog other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  }
};

namespace detail {
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
}  // namespace detail

// One line per (t, cell, slice). The format is stable so reruns of the same
// seed can be compared byte for byte.
inline void write_metrics_csv(std::ostream& out, const MetricsLog& log, const std::string& scheme,
                              std::uint64_t seed) {
  out << "t,phase,cell,slice,action,load,throughput_sat,delay_sat,local_reward,global_reward,"
         "scheme,seed\n";
  for (const auto& r : log.rows) {
    out << r.t << ',' << phase_name(r.phase) << ',' << r.cell << ',' << r.slice << ','
        << detail::fmt_double(r.action) << ',' << detail::fmt_double(r.load) << ','
        << detail::fmt_double(r.thr_sat) << ',' << detail::fmt_double(r.delay_sat) << ','
        << detail::fmt_double(r.local_reward) << ',' << detail::fmt_double(r.global_reward) << ','
        << scheme << ',' << seed << '\n';
  }
}

struct LoadedMetrics {
  MetricsLog log;
  std::string scheme;
  std::uint64_t seed = 0;
};

inline LoadedMetrics read_metrics_csv(std::istream& in) {
  LoadedMetrics out;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("metrics: empty csv");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 12) throw std::runtime_error("metrics: bad csv row: " + line);
    MetricsRow r;
    r.t = std::stol(f[0]);
    r.phase = phase_from_name(f[1]);
    r.cell = std::stoi(f[2]);
    r.slice = std::stoi(f[3]);
    r.action = std::stod(f[4]);
    r.load = std::stod(f[5]);
    r.thr_sat = std::stod(f[6]);
    r.delay_sat = std::stod(f[7]);
    r.local_reward = std::stod(f[8]);
    r.global_reward = std::stod(f[9]);
    out.scheme = f[10];
    out.seed = std::stoull(f[11]);
    out.log.rows.push_back(r);
  }
  return out;
}

}  // namespace dirp
