#pragma once

#include "dirp/config.hpp"
#include "dirp/scenario_io.hpp"

namespace dirp {

// Demand-proportional split. This doubles as the oriented-exploration hint
// for the learned schemes: it is the obvious rule an operator would start
// from, so learning has to beat it to be worth anything.
inline Vec bl_heur_action(const KpiReport& kpi, int k) {
  const int N = kpi.num_slices;
  Vec share(static_cast<std::size_t>(N), 1.0 / N);
  double total = 0.0;
  for (int n = 0; n < N; ++n) total += kpi.demand_bps[kpi.at(k, n)];
  if (total <= 0.0) return share;
  for (int n = 0; n < N; ++n)
    share[static_cast<std::size_t>(n)] = kpi.demand_bps[kpi.at(k, n)] / total;
  return share;
}

namespace detail {

inline void log_step(MetricsLog& log, const KpiReport& next, const std::vector<Vec>& actions,
                     const std::vector<SliceSpec>& slices, RewardKind reward, PhaseTag tag) {
  const double global = global_reward(next, slices, reward);
  for (int k = 0; k < next.num_cells; ++k) {
    const double lr_k = local_reward(next, k, slices, reward);
    for (int n = 0; n < next.num_slices; ++n) {
      const SatRatios sat = sat_ratios(next, k, n, slices);
      MetricsRow row;
      row.t = next.t;
      row.phase = tag;
      row.cell = k;
      row.slice = n;
      row.action = actions[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
      row.load = next.load[next.at(k, n)];
      row.thr_sat = capped01(sat.thr);
      row.delay_sat = capped01(sat.delay);
      row.local_reward = lr_k;
      row.global_reward = global;
      log.rows.push_back(row);
    }
  }
}

}  // namespace detail

// Fixed rule, no learning. The schedule only provides the horizon and the
// phase labels so its rows line up with the learned runs.
inline MetricsLog run_bl_heur(NetworkEnv& env, const PhaseSchedule& sched, RewardKind reward) {
  const Scenario& sc = env.scenario();
  MetricsLog log;
  for (long i = 0; i < sched.horizon(); ++i) {
    const Phase phase = sched.phase_at(i);
    const KpiReport obs = env.kpi();
    std::vector<Vec> actions(static_cast<std::size_t>(sc.topology.num_cells));
    for (int k = 0; k < sc.topology.num_cells; ++k)
      actions[static_cast<std::size_t>(k)] = bl_heur_action(obs, k);
    const KpiReport next = env.step(actions);
    const PhaseTag tag = phase == Phase::explore  ? PhaseTag::expl
                         : phase == Phase::train ? PhaseTag::train
                                                 : PhaseTag::eval;
    detail::log_step(log, next, actions, sc.slices, reward, tag);
  }
  return log;
}

inline const std::vector<int> kCentralActorHidden = {384, 192, 64};
inline const std::vector<int> kCentralCriticHidden = {324, 144, 64};

// One agent sees every cell and emits all K allocations at once, each
// cell's block on its own simplex.
inline AgentRuntime make_central_runtime(const Scenario& sc, const Td3Hyper& hyper,
                                         std::uint64_t master_seed,
                                         std::size_t capacity = kReplayCapacity) {
  const int K = sc.topology.num_cells;
  const int N = sc.topology.num_slices;
  return AgentRuntime{make_td3_agent(K * local_state_dim(N), K * N, K, kCentralActorHidden,
                                     kCentralCriticHidden, hyper, central_agent_seed(master_seed)),
                      ReplayBuffer(capacity), ExploreState{}, 0};
}

struct CentralResult {
  AgentRuntime rt;
  MetricsLog log;
};

inline CentralResult run_bl_cen(NetworkEnv& env, const PhaseSchedule& sched, RewardKind reward,
                                const HintFn& hint_fn, std::uint64_t master_seed,
                                const Td3Hyper& hyper) {
  const Scenario& sc = env.scenario();
  const int K = sc.topology.num_cells;
  const int N = sc.topology.num_slices;

  CentralResult out{make_central_runtime(sc, hyper, master_seed), MetricsLog{}};
  AgentRuntime& rt = out.rt;
  rt.explore.eps = sched.eps0;

  for (long i = 0; i < sched.horizon(); ++i) {
    const Phase phase = sched.phase_at(i);
    const KpiReport obs = env.kpi();
    const Vec state = build_global_state(obs, sc.slices);

    Vec hint;
    const Vec* hint_ptr = nullptr;
    if (hint_fn) {
      hint.reserve(static_cast<std::size_t>(K * N));
      for (int k = 0; k < K; ++k) {
        const Vec h = hint_fn(obs, k);
        hint.insert(hint.end(), h.begin(), h.end());
      }
      hint_ptr = &hint;
    }
    const Vec flat = select_action(rt.td3, rt.explore, state, i, sched, hint_ptr);

    std::vector<Vec> actions(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
      actions[static_cast<std::size_t>(k)] =
          Vec(flat.begin() + k * N, flat.begin() + (k + 1) * N);

    const KpiReport next = env.step(actions);
    const double global = global_reward(next, sc.slices, reward);
    if (phase != Phase::eval) {
      Transition tr;
      tr.state = state;
      tr.action = flat;
      tr.reward = global;
      tr.next_state = build_global_state(next, sc.slices);
      tr.t = next.t;
      tr.source_cell = -1;
      rt.buffer.push(std::move(tr));
    }
    maybe_train(rt, phase);

    const PhaseTag tag = phase == Phase::explore  ? PhaseTag::expl
                         : phase == Phase::train ? PhaseTag::train
                                                 : PhaseTag::eval;
    detail::log_step(out.log, next, actions, sc.slices, reward, tag);
  }
  return out;
}

// ---- per-run summary ----------------------------------------------------

struct RunSummary {
  std::string scheme;
  RewardKind reward = RewardKind::max_min;
  std::uint64_t seed = 0;
  long eval_rows = 0;
  double mean_eval_global = 0.0;
  double mean_eval_local = 0.0;
  Vec slice_thr_sat;    // eval means per slice
  Vec slice_delay_sat;
  Vec slice_min_sat;    // eval mean of min(thr, delay) per slice
};

inline RunSummary summarize(const MetricsLog& log, int num_slices, const std::string& scheme,
                            RewardKind reward, std::uint64_t seed) {
  RunSummary s;
  s.scheme = scheme;
  s.reward = reward;
  s.seed = seed;
  s.slice_thr_sat.assign(static_cast<std::size_t>(num_slices), 0.0);
  s.slice_delay_sat.assign(static_cast<std::size_t>(num_slices), 0.0);
  s.slice_min_sat.assign(static_cast<std::size_t>(num_slices), 0.0);
  std::vector<long> counts(static_cast<std::size_t>(num_slices), 0);
  for (const auto& r : log.rows) {
    if (!is_eval_phase(r.phase)) continue;
    s.eval_rows += 1;
    s.mean_eval_global += r.global_reward;
    s.mean_eval_local += r.local_reward;
    const auto n = static_cast<std::size_t>(r.slice);
    s.slice_thr_sat[n] += r.thr_sat;
    s.slice_delay_sat[n] += r.delay_sat;
    s.slice_min_sat[n] += std::min(r.thr_sat, r.delay_sat);
    counts[n] += 1;
  }
  if (s.eval_rows > 0) {
    s.mean_eval_global /= static_cast<double>(s.eval_rows);
    s.mean_eval_local /= static_cast<double>(s.eval_rows);
  }
  for (int n = 0; n < num_slices; ++n) {
    const auto i = static_cast<std::size_t>(n);
    if (counts[i] > 0) {
      s.slice_thr_sat[i] /= static_cast<double>(counts[i]);
      s.slice_delay_sat[i] /= static_cast<double>(counts[i]);
      s.slice_min_sat[i] /= static_cast<double>(counts[i]);
    }
  }
  return s;
}

inline json summary_to_json(const RunSummary& s) {
  return json{{"scheme", s.scheme},
              {"reward", reward_name(s.reward)},
              {"seed", s.seed},
              {"eval_rows", s.eval_rows},
              {"mean_eval_global", s.mean_eval_global},
              {"mean_eval_local", s.mean_eval_local},
              {"slice_thr_sat", s.slice_thr_sat},
              {"slice_delay_sat", s.slice_delay_sat},
              {"slice_min_sat", s.slice_min_sat}};
}

// ---- full experiment ----------------------------------------------------

struct SeedRun {
  MetricsLog log;
  RunSummary summary;
  // final actor per cell; one entry for bl-cen, empty for bl-heur
  std::vector<Mlp> actors;
};

inline SeedRun run_one_seed(const ExperimentConfig& cfg, const Scenario& sc, std::uint64_t seed) {
  NetworkEnv env(sc, seed);
  PhaseSchedule sched;
  sched.expl_steps = cfg.resolved_expl_steps();
  sched.train_steps = cfg.train_steps;
  sched.eval_steps = cfg.eval_steps;
  const Td3Hyper hyper;
  const HintFn hint = cfg.use_hint ? HintFn(bl_heur_action) : HintFn{};

  SeedRun run;
  if (cfg.scheme == "bl-heur") {
    run.log = run_bl_heur(env, sched, cfg.reward);
  } else if (cfg.scheme == "bl-cen") {
    CentralResult res = run_bl_cen(env, sched, cfg.reward, hint, seed, hyper);
    run.log = std::move(res.log);
    run.actors.push_back(std::move(res.rt.td3.actor));
  } else if (cfg.scheme == "dirp" || cfg.scheme == "bl-dist") {
    std::vector<AgentRuntime> agents = make_cell_runtimes(sc, hyper, seed);
    RunOptions opt;
    opt.reward = cfg.reward;
    opt.use_messages = cfg.scheme == "dirp";
    opt.hint = hint;
    run.log = run_dirp(env, agents, sched, opt);
    for (auto& a : agents) run.actors.push_back(std::move(a.td3.actor));
  } else {
    const auto ts = transfer_scheme_of(cfg.scheme);
    if (!ts) throw std::runtime_error("config: unknown scheme \"" + cfg.scheme + "\"");
    TlSchedule tl;
    tl.gen.expl_steps = cfg.gen_expl_steps;
    tl.gen.train_steps = cfg.gen_train_steps;
    tl.gen.eval_steps = 0;
    tl.spec = sched;
    TlResult res =
        run_tl_dirp(env, tl, *ts, cfg.reward, hint, seed, hyper, cfg.offline_epochs);
    run.log = std::move(res.log);
    for (auto& a : res.agents) run.actors.push_back(std::move(a.td3.actor));
  }
  run.summary = summarize(run.log, sc.topology.num_slices, cfg.scheme, cfg.reward, seed);
  return run;
}

struct ExperimentResult {
  std::vector<RunSummary> per_seed;
  double mean_eval_global = 0.0;  // mean over seeds
  std::vector<std::string> csv_paths;
};

inline std::string run_file_stem(const ExperimentConfig& cfg, std::uint64_t seed) {
  return cfg.scheme + "-" + reward_name(cfg.reward) + "-seed" + std::to_string(seed);
}

// Runs every seed, writes one metrics csv and the final actor checkpoints
// per seed plus an aggregate summary.json under cfg.out_dir.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const Scenario sc = load_scenario(cfg.scenario);
  fs::create_directories(cfg.out_dir);

  ExperimentResult out;
  json per_seed = json::array();
  for (std::uint64_t seed : cfg.seeds) {
    SeedRun run = run_one_seed(cfg, sc, seed);
    const std::string stem = run_file_stem(cfg, seed);

    const auto csv_path = fs::path(cfg.out_dir) / (stem + ".csv");
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("experiment: cannot write " + csv_path.string());
    write_metrics_csv(csv, run.log, cfg.scheme, seed);
    out.csv_paths.push_back(csv_path.string());

    for (std::size_t k = 0; k < run.actors.size(); ++k) {
      const std::string tag = cfg.scheme == "bl-cen" ? "central" : "cell" + std::to_string(k);
      save_checkpoint((fs::path(cfg.out_dir) / (stem + "-actor-" + tag + ".json")).string(),
                      run.actors[k]);
    }

    per_seed.push_back(summary_to_json(run.summary));
    out.mean_eval_global += run.summary.mean_eval_global;
    out.per_seed.push_back(std::move(run.summary));
  }
  out.mean_eval_global /= static_cast<double>(cfg.seeds.size());

  json summary{{"scheme", cfg.scheme},
               {"reward", reward_name(cfg.reward)},
               {"scenario", cfg.scenario},
               {"seeds", cfg.seeds},
               {"expl_steps", cfg.resolved_expl_steps()},
               {"train_steps", cfg.train_steps},
               {"eval_steps", cfg.eval_steps},
               {"mean_eval_global", out.mean_eval_global},
               {"per_seed", per_seed}};
  const auto sum_path =
      fs::path(cfg.out_dir) / (cfg.scheme + "-" + reward_name(cfg.reward) + "-summary.json");
  std::ofstream sum(sum_path);
  if (!sum) throw std::runtime_error("experiment: cannot write " + sum_path.string());
  sum << summary.dump(2) << "\n";
  return out;
}

}  // namespace dirp
