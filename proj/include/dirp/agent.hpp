#pragma once

#include <functional>
#include <optional>

#include "dirp/env.hpp"
#include "dirp/mdp.hpp"
#include "dirp/metrics.hpp"
#include "dirp/replay.hpp"
#include "dirp/td3.hpp"

namespace dirp {

enum class Phase { explore, train, eval };

// Exploration -> training -> evaluation, plus the knobs of the oriented
// exploration: epsilon-greedy decay during training and the ramp of the
// heuristic-hint probability during exploration.
struct PhaseSchedule {
  long expl_steps = 100;
  long train_steps = 5000;
  long eval_steps = 500;
  double eps0 = 1.0;
  double eps_decay = 0.999;
  double hint_start = 0.5;
  double hint_end = 0.9;

  long horizon() const { return expl_steps + train_steps + eval_steps; }

  Phase phase_at(long i) const {
    if (i < expl_steps) return Phase::explore;
    if (i < expl_steps + train_steps) return Phase::train;
    return Phase::eval;
  }

  // linear ramp across the exploration segment
  double hint_prob(long i) const {
    if (expl_steps <= 1) return hint_end;
    const double f = static_cast<double>(i) / static_cast<double>(expl_steps - 1);
    return hint_start + (hint_end - hint_start) * std::min(f, 1.0);
  }
};

// flat Dirichlet per action group
inline Vec random_simplex_action(std::mt19937_64& rng, int dim, int groups) {
  const int block = dim / groups;
  Vec out;
  out.reserve(static_cast<std::size_t>(dim));
  for (int g = 0; g < groups; ++g) {
    const Vec part = dirichlet_flat(rng, block);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

struct ExploreState {
  double eps = 1.0;
};

// One decision without any epsilon bookkeeping; `hint_p` is the chance of
// following the heuristic inside the random branches.
inline Vec behavior_action(Td3Agent& agent, double eps, const Vec& obs, Phase phase, double hint_p,
                           const Vec* hint) {
  switch (phase) {
    case Phase::explore: {
      const double u = uniform01(agent.rng);
      if (hint != nullptr && u < hint_p) return *hint;
      return random_simplex_action(agent.rng, agent.action_dim, agent.action_groups);
    }
    case Phase::train: {
      const double u = uniform01(agent.rng);
      if (u < eps) {
        const double v = uniform01(agent.rng);
        if (hint != nullptr && v < hint_p) return *hint;
        return random_simplex_action(agent.rng, agent.action_dim, agent.action_groups);
      }
      return noisy_policy_action(agent, obs, agent.hyper.explore_sigma);
    }
    case Phase::eval: return policy_action(agent, obs);
  }
  return policy_action(agent, obs);
}

// Behaviour policy for one decision. Exploration mixes heuristic hints with
// random simplex draws; training follows epsilon-greedy between oriented
// random actions and the noisy policy; evaluation is the plain policy.
inline Vec select_action(Td3Agent& agent, ExploreState& es, const Vec& obs, long i,
                         const PhaseSchedule& sched, const Vec* hint) {
  const Phase phase = sched.phase_at(i);
  const double hint_p = phase == Phase::explore ? sched.hint_prob(i) : sched.hint_end;
  Vec act = behavior_action(agent, es.eps, obs, phase, hint_p, hint);
  if (phase == Phase::train) es.eps *= sched.eps_decay;
  return act;
}

// One learner plus its private experience and exploration state.
struct AgentRuntime {
  Td3Agent td3;
  ReplayBuffer buffer;
  ExploreState explore;
  long train_calls = 0;
};

inline constexpr std::size_t kReplayCapacity = 20000;
inline const std::vector<int> kLocalActorHidden = {48, 24};
inline const std::vector<int> kLocalCriticHidden = {64, 24};

// Local controller of one cell: state is the 5N local view plus the N-dim
// neighbor message slot. The slot is part of the network shape even when
// coordination is off; the no-message baseline just reads zeros there, so
// the two variants differ only in what flows through the inputs.
inline AgentRuntime make_local_runtime(int num_slices, const Td3Hyper& hyper, std::uint64_t seed,
                                       std::size_t capacity = kReplayCapacity) {
  const int sdim = local_state_dim(num_slices) + num_slices;
  return AgentRuntime{
      make_td3_agent(sdim, num_slices, 1, kLocalActorHidden, kLocalCriticHidden, hyper, seed),
      ReplayBuffer(capacity), ExploreState{}, 0};
}

// Seed streams: one per cell controller, one for a shared generalist, one
// for the centralized baseline. The env hashes the master seed itself.
inline std::uint64_t cell_agent_seed(std::uint64_t master, int cell) {
  return substream_seed(master, 100 + static_cast<std::uint64_t>(cell));
}
inline std::uint64_t generalist_seed(std::uint64_t master) { return substream_seed(master, 50); }
inline std::uint64_t central_agent_seed(std::uint64_t master) { return substream_seed(master, 60); }

inline std::vector<AgentRuntime> make_cell_runtimes(const Scenario& sc, const Td3Hyper& hyper,
                                                    std::uint64_t master,
                                                    std::size_t capacity = kReplayCapacity) {
  std::vector<AgentRuntime> agents;
  agents.reserve(static_cast<std::size_t>(sc.topology.num_cells));
  for (int k = 0; k < sc.topology.num_cells; ++k)
    agents.push_back(
        make_local_runtime(sc.topology.num_slices, hyper, cell_agent_seed(master, k), capacity));
  return agents;
}

struct TrainResult {
  bool trained = false;
  double critic_loss = 0.0;
  std::optional<double> actor_loss;
};

// Train once the buffer can fill a batch; one critic step per call, actor
// and targets on the delayed cadence.
inline TrainResult maybe_train(AgentRuntime& rt, Phase phase) {
  TrainResult res;
  if (phase != Phase::train) return res;
  if (rt.buffer.size() < static_cast<std::size_t>(rt.td3.hyper.batch_size)) return res;
  const std::vector<Transition> batch = rt.buffer.sample(rt.td3.rng, rt.td3.hyper.batch_size);
  res.critic_loss = update_critics(rt.td3, batch);
  rt.train_calls += 1;
  res.actor_loss = update_actor_and_targets(rt.td3, batch, rt.train_calls);
  res.trained = true;
  return res;
}

using HintFn = std::function<Vec(const KpiReport&, int)>;

struct RunOptions {
  RewardKind reward = RewardKind::max_min;
  bool use_messages = true;  // false feeds zeros into the message inputs
  HintFn hint;  // optional oriented-exploration teacher
  PhaseTag expl_label = PhaseTag::expl;
  PhaseTag train_label = PhaseTag::train;
  PhaseTag eval_label = PhaseTag::eval;
};

namespace detail {
inline Vec agent_observation(const KpiReport& kpi, int k, const Scenario& sc, bool use_messages) {
  Vec s = build_local_state(kpi, k, sc.slices);
  if (use_messages) {
    const NeighborMessage m =
        extract_message(kpi, k, sc.topology.neighbors[static_cast<std::size_t>(k)]);
    s.insert(s.end(), m.mean_load.begin(), m.mean_load.end());
  } else {
    s.insert(s.end(), static_cast<std::size_t>(sc.topology.num_slices), 0.0);
  }
  return s;
}

inline PhaseTag label_for(Phase p, const RunOptions& opt) {
  switch (p) {
    case Phase::explore: return opt.expl_label;
    case Phase::train: return opt.train_label;
    case Phase::eval: return opt.eval_label;
  }
  return opt.eval_label;
}
}  // namespace detail

// The multi-agent control loop: every cell's controller acts on its local
// view each step, the surrogate advances, rewards and transitions are
// recorded, and training runs on the schedule's cadence. The env keeps its
// clock across calls, so a transfer pipeline can chain stages.
inline MetricsLog run_dirp(NetworkEnv& env, std::vector<AgentRuntime>& agents,
                           const PhaseSchedule& sched, const RunOptions& opt) {
  const Scenario& sc = env.scenario();
  const int K = sc.topology.num_cells;
  const int N = sc.topology.num_slices;
  if (static_cast<int>(agents.size()) != K)
    throw std::invalid_argument("run_dirp: one agent per cell required");

  for (auto& rt : agents) rt.explore.eps = sched.eps0;

  MetricsLog log;
  log.rows.reserve(static_cast<std::size_t>(sched.horizon()) * K * N);

  for (long i = 0; i < sched.horizon(); ++i) {
    const Phase phase = sched.phase_at(i);
    const KpiReport obs = env.kpi();

    std::vector<Vec> inputs(static_cast<std::size_t>(K));
    std::vector<Vec> hints(static_cast<std::size_t>(K));
    std::vector<Vec> actions(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      inputs[static_cast<std::size_t>(k)] = detail::agent_observation(obs, k, sc, opt.use_messages);
      const Vec* hint = nullptr;
      if (opt.hint) {
        hints[static_cast<std::size_t>(k)] = opt.hint(obs, k);
        hint = &hints[static_cast<std::size_t>(k)];
      }
      AgentRuntime& rt = agents[static_cast<std::size_t>(k)];
      actions[static_cast<std::size_t>(k)] =
          select_action(rt.td3, rt.explore, inputs[static_cast<std::size_t>(k)], i, sched, hint);
    }

    const KpiReport next = env.step(actions);
    const double global = global_reward(next, sc.slices, opt.reward);
    std::vector<double> locals(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
      locals[static_cast<std::size_t>(k)] = local_reward(next, k, sc.slices, opt.reward);

    if (phase != Phase::eval) {
      for (int k = 0; k < K; ++k) {
        Transition tr;
        tr.state = inputs[static_cast<std::size_t>(k)];
        tr.action = actions[static_cast<std::size_t>(k)];
        tr.reward = locals[static_cast<std::size_t>(k)];
        tr.next_state = detail::agent_observation(next, k, sc, opt.use_messages);
        tr.t = next.t;
        tr.source_cell = k;
        agents[static_cast<std::size_t>(k)].buffer.push(std::move(tr));
      }
    }

    for (int k = 0; k < K; ++k) maybe_train(agents[static_cast<std::size_t>(k)], phase);

    const PhaseTag label = detail::label_for(phase, opt);
    for (int k = 0; k < K; ++k)
      for (int n = 0; n < N; ++n) {
        const SatRatios sat = sat_ratios(next, k, n, sc.slices);
        MetricsRow row;
        row.t = next.t;
        row.phase = label;
        row.cell = k;
        row.slice = n;
        row.action = actions[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
        row.load = next.load[next.at(k, n)];
        row.thr_sat = capped01(sat.thr);
        row.delay_sat = capped01(sat.delay);
        row.local_reward = locals[static_cast<std::size_t>(k)];
        row.global_reward = global;
        log.rows.push_back(row);
      }
  }
  return log;
}

}  // namespace dirp
