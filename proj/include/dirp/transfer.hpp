#pragma once

#include <filesystem>
#include <fstream>

#include "dirp/agent.hpp"
#include "dirp/checkpoint.hpp"

namespace dirp {

// What flows from the generalist stage into the per-cell specialists:
// nothing, the frozen generalist itself, both knowledge kinds, only the
// matching instances, only the model, or the full pipeline with an offline
// finetune on the transferred instances.
enum class TransferScheme {
  none,
  gen_only,
  spec_full,
  spec_instance_only,
  spec_model_only,
  tl_dirp
};

inline const char* transfer_scheme_name(TransferScheme s) {
  switch (s) {
    case TransferScheme::none: return "none";
    case TransferScheme::gen_only: return "gen";
    case TransferScheme::spec_full: return "spec";
    case TransferScheme::spec_instance_only: return "spec-instance";
    case TransferScheme::spec_model_only: return "spec-model";
    case TransferScheme::tl_dirp: return "tl-dirp";
  }
  return "?";
}

inline bool scheme_transfers_model(TransferScheme s) {
  return s == TransferScheme::gen_only || s == TransferScheme::spec_full ||
         s == TransferScheme::spec_model_only || s == TransferScheme::tl_dirp;
}

inline bool scheme_transfers_instances(TransferScheme s) {
  return s == TransferScheme::spec_full || s == TransferScheme::spec_instance_only ||
         s == TransferScheme::tl_dirp;
}

// Schemes that arrive without a usable policy still need the exploration
// segment; the rest start from transferred knowledge and skip it.
inline bool scheme_keeps_exploration(TransferScheme s) {
  return s == TransferScheme::spec_model_only;
}

struct GeneralistResult {
  Td3Agent agent;
  ReplayBuffer buffer;
  MetricsLog log;
  double final_eps = 1.0;
};

// A single policy learns every cell from its local view: per step it acts
// once per cell, all transitions land in one buffer, and one training step
// runs per timestamp. Epsilon decays per timestamp as well.
inline GeneralistResult train_generalist(NetworkEnv& env, const PhaseSchedule& sched,
                                         RewardKind reward, const HintFn& hint_fn,
                                         std::uint64_t master_seed, const Td3Hyper& hyper,
                                         std::size_t capacity = kReplayCapacity) {
  const Scenario& sc = env.scenario();
  const int K = sc.topology.num_cells;
  const int N = sc.topology.num_slices;

  GeneralistResult out{
      make_td3_agent(local_state_dim(N) + N, N, 1, kLocalActorHidden, kLocalCriticHidden, hyper,
                     generalist_seed(master_seed)),
      ReplayBuffer(capacity), MetricsLog{}};
  Td3Agent& gen = out.agent;
  double eps = sched.eps0;
  long train_calls = 0;

  for (long i = 0; i < sched.horizon(); ++i) {
    const Phase phase = sched.phase_at(i);
    const KpiReport obs = env.kpi();

    std::vector<Vec> inputs(static_cast<std::size_t>(K));
    std::vector<Vec> hints(static_cast<std::size_t>(K));
    std::vector<Vec> actions(static_cast<std::size_t>(K));
    const double hint_p = phase == Phase::explore ? sched.hint_prob(i) : sched.hint_end;
    for (int k = 0; k < K; ++k) {
      inputs[static_cast<std::size_t>(k)] = detail::agent_observation(obs, k, sc, true);
      const Vec* hint = nullptr;
      if (hint_fn) {
        hints[static_cast<std::size_t>(k)] = hint_fn(obs, k);
        hint = &hints[static_cast<std::size_t>(k)];
      }
      actions[static_cast<std::size_t>(k)] =
          behavior_action(gen, eps, inputs[static_cast<std::size_t>(k)], phase, hint_p, hint);
    }
    if (phase == Phase::train) eps *= sched.eps_decay;

    const KpiReport next = env.step(actions);
    const double global = global_reward(next, sc.slices, reward);
    for (int k = 0; k < K; ++k) {
      const double lr_k = local_reward(next, k, sc.slices, reward);
      if (phase != Phase::eval) {
        Transition tr;
        tr.state = inputs[static_cast<std::size_t>(k)];
        tr.action = actions[static_cast<std::size_t>(k)];
        tr.reward = lr_k;
        tr.next_state = detail::agent_observation(next, k, sc, true);
        tr.t = next.t;
        tr.source_cell = k;
        out.buffer.push(std::move(tr));
      }
      for (int n = 0; n < N; ++n) {
        const SatRatios sat = sat_ratios(next, k, n, sc.slices);
        MetricsRow row;
        row.t = next.t;
        row.phase = phase == Phase::explore ? PhaseTag::gen_expl : PhaseTag::gen_train;
        row.cell = k;
        row.slice = n;
        row.action = actions[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
        row.load = next.load[next.at(k, n)];
        row.thr_sat = capped01(sat.thr);
        row.delay_sat = capped01(sat.delay);
        row.local_reward = lr_k;
        row.global_reward = global;
        out.log.rows.push_back(row);
      }
    }

    if (phase == Phase::train &&
        out.buffer.size() >= static_cast<std::size_t>(gen.hyper.batch_size)) {
      const auto batch = out.buffer.sample(gen.rng, gen.hyper.batch_size);
      update_critics(gen, batch);
      train_calls += 1;
      update_actor_and_targets(gen, batch, train_calls);
    }
  }
  out.final_eps = eps;
  return out;
}

struct KnowledgePackage {
  int source_cell = -1;
  TransferScheme scheme = TransferScheme::none;
  bool has_model = false;
  Mlp actor, critic1, critic2;
  Mlp target_actor, target_critic1, target_critic2;
  std::vector<Transition> instances;
  long generalist_critic_updates = 0;
};

// Cut one cell's share out of the generalist: model weights and/or the
// transitions this cell generated (instance selection is same-cell).
inline KnowledgePackage build_package(const Td3Agent& gen, const ReplayBuffer& buffer,
                                      TransferScheme scheme, int cell) {
  KnowledgePackage pkg;
  pkg.source_cell = cell;
  pkg.scheme = scheme;
  pkg.generalist_critic_updates = gen.critic_updates;
  if (scheme_transfers_model(scheme)) {
    pkg.has_model = true;
    pkg.actor = gen.actor;
    pkg.critic1 = gen.critic1;
    pkg.critic2 = gen.critic2;
    pkg.target_actor = gen.target_actor;
    pkg.target_critic1 = gen.target_critic1;
    pkg.target_critic2 = gen.target_critic2;
  }
  if (scheme_transfers_instances(scheme)) {
    for (std::size_t i = 0; i < buffer.size(); ++i)
      if (buffer[i].source_cell == cell) pkg.instances.push_back(buffer[i]);
  }
  return pkg;
}

// Specialist start state for one cell. Transferred model weights replace
// the fresh init bitwise; optimizer moments start clean either way.
inline AgentRuntime init_specialist(const KnowledgePackage& pkg, int num_slices,
                                    const Td3Hyper& hyper, std::uint64_t master_seed,
                                    std::size_t capacity = kReplayCapacity) {
  AgentRuntime rt = make_local_runtime(num_slices, hyper,
                                       cell_agent_seed(master_seed, pkg.source_cell), capacity);
  if (pkg.has_model) {
    rt.td3.actor = pkg.actor;
    rt.td3.critic1 = pkg.critic1;
    rt.td3.critic2 = pkg.critic2;
    rt.td3.target_actor = pkg.target_actor;
    rt.td3.target_critic1 = pkg.target_critic1;
    rt.td3.target_critic2 = pkg.target_critic2;
  }
  for (const auto& tr : pkg.instances) rt.buffer.push(tr);
  return rt;
}

// Offline finetune on the transferred instances only; the env is never
// touched. Runs `epochs` sweeps of floor(count / batch) updates each.
inline long offline_finetune(AgentRuntime& rt, int epochs) {
  const int batch = rt.td3.hyper.batch_size;
  if (rt.buffer.size() < static_cast<std::size_t>(batch)) return 0;
  const long per_epoch = static_cast<long>(rt.buffer.size()) / batch;
  long done = 0;
  for (int e = 0; e < epochs; ++e)
    for (long u = 0; u < per_epoch; ++u) {
      const auto b = rt.buffer.sample(rt.td3.rng, batch);
      update_critics(rt.td3, b);
      rt.train_calls += 1;
      update_actor_and_targets(rt.td3, b, rt.train_calls);
      ++done;
    }
  return done;
}

struct TlSchedule {
  PhaseSchedule gen;   // generalist stage, eval segment unused
  PhaseSchedule spec;  // specialist stage as configured for a plain run
};

struct TlResult {
  std::vector<AgentRuntime> agents;
  MetricsLog log;             // generalist stage followed by specialist stage
  long offline_updates = 0;   // tl-dirp only
};

inline constexpr int kOfflineEpochs = 3;

// The full pipeline: generalist pretraining, per-cell package handoff,
// specialist stage on the same env. Scheme none bypasses the pipeline and
// degenerates to the plain distributed run.
inline TlResult run_tl_dirp(NetworkEnv& env, const TlSchedule& sched, TransferScheme scheme,
                            RewardKind reward, const HintFn& hint_fn, std::uint64_t master_seed,
                            const Td3Hyper& hyper, int offline_epochs = kOfflineEpochs) {
  const Scenario& sc = env.scenario();
  const int K = sc.topology.num_cells;
  const int N = sc.topology.num_slices;

  TlResult out;
  RunOptions opt;
  opt.reward = reward;
  opt.hint = hint_fn;

  if (scheme == TransferScheme::none) {
    out.agents = make_cell_runtimes(sc, hyper, master_seed);
    out.log = run_dirp(env, out.agents, sched.spec, opt);
    return out;
  }

  PhaseSchedule gen_sched = sched.gen;
  gen_sched.eval_steps = 0;
  GeneralistResult gen = train_generalist(env, gen_sched, reward, hint_fn, master_seed, hyper);
  out.log.append(std::move(gen.log));

  PhaseSchedule spec_sched = sched.spec;
  // one continuous pipeline: the specialist stage keeps the epsilon the
  // generalist decayed to instead of starting exploration over
  spec_sched.eps0 = gen.final_eps;
  if (scheme == TransferScheme::gen_only) {
    spec_sched.eval_steps = sched.spec.horizon();
    spec_sched.expl_steps = 0;
    spec_sched.train_steps = 0;
  } else if (!scheme_keeps_exploration(scheme)) {
    spec_sched.expl_steps = 0;
  }

  out.agents.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const KnowledgePackage pkg = build_package(gen.agent, gen.buffer, scheme, k);
    out.agents.push_back(init_specialist(pkg, N, hyper, master_seed));
    if (scheme == TransferScheme::tl_dirp)
      out.offline_updates += offline_finetune(out.agents.back(), offline_epochs);
  }

  opt.expl_label = PhaseTag::spec_expl;
  opt.train_label = PhaseTag::spec_train;
  opt.eval_label = PhaseTag::spec_eval;
  out.log.append(run_dirp(env, out.agents, spec_sched, opt));
  return out;
}

// ---- package persistence ----------------------------------------------

inline void save_package(const std::string& dir, const KnowledgePackage& pkg) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  json meta{{"format", "dirp-package"},
            {"version", 1},
            {"source_cell", pkg.source_cell},
            {"scheme", transfer_scheme_name(pkg.scheme)},
            {"has_model", pkg.has_model},
            {"generalist_critic_updates", pkg.generalist_critic_updates},
            {"instance_count", pkg.instances.size()}};
  {
    std::ofstream out(fs::path(dir) / "meta.json");
    if (!out) throw std::runtime_error("package: cannot write meta.json in " + dir);
    out << meta.dump(2) << "\n";
  }
  if (pkg.has_model) {
    save_checkpoint((fs::path(dir) / "actor.json").string(), pkg.actor);
    save_checkpoint((fs::path(dir) / "critic1.json").string(), pkg.critic1);
    save_checkpoint((fs::path(dir) / "critic2.json").string(), pkg.critic2);
    save_checkpoint((fs::path(dir) / "target_actor.json").string(), pkg.target_actor);
    save_checkpoint((fs::path(dir) / "target_critic1.json").string(), pkg.target_critic1);
    save_checkpoint((fs::path(dir) / "target_critic2.json").string(), pkg.target_critic2);
  }
  std::ofstream out(fs::path(dir) / "instances.csv");
  if (!out) throw std::runtime_error("package: cannot write instances.csv in " + dir);
  out << "# dirp-instances v1\n";
  out << "t,source_cell,reward,state,action,next_state\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  auto put_vec = [&](const Vec& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0) out << ';';
      put(v[i]);
    }
  };
  for (const auto& tr : pkg.instances) {
    out << tr.t << ',' << tr.source_cell << ',';
    put(tr.reward);
    out << ',';
    put_vec(tr.state);
    out << ',';
    put_vec(tr.action);
    out << ',';
    put_vec(tr.next_state);
    out << '\n';
  }
}

inline KnowledgePackage load_package(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream metain(fs::path(dir) / "meta.json");
  if (!metain) throw std::runtime_error("package: cannot read meta.json in " + dir);
  json meta;
  metain >> meta;
  if (meta.value("format", "") != "dirp-package")
    throw std::runtime_error("package: missing format tag in " + dir);
  if (meta.value("version", 0) != 1)
    throw std::runtime_error("package: unsupported version in " + dir);

  KnowledgePackage pkg;
  pkg.source_cell = meta.at("source_cell").get<int>();
  pkg.has_model = meta.at("has_model").get<bool>();
  pkg.generalist_critic_updates = meta.at("generalist_critic_updates").get<long>();
  for (TransferScheme s :
       {TransferScheme::none, TransferScheme::gen_only, TransferScheme::spec_full,
        TransferScheme::spec_instance_only, TransferScheme::spec_model_only,
        TransferScheme::tl_dirp})
    if (meta.at("scheme").get<std::string>() == transfer_scheme_name(s)) pkg.scheme = s;
  if (pkg.has_model) {
    pkg.actor = load_checkpoint((fs::path(dir) / "actor.json").string()).net;
    pkg.critic1 = load_checkpoint((fs::path(dir) / "critic1.json").string()).net;
    pkg.critic2 = load_checkpoint((fs::path(dir) / "critic2.json").string()).net;
    pkg.target_actor = load_checkpoint((fs::path(dir) / "target_actor.json").string()).net;
    pkg.target_critic1 = load_checkpoint((fs::path(dir) / "target_critic1.json").string()).net;
    pkg.target_critic2 = load_checkpoint((fs::path(dir) / "target_critic2.json").string()).net;
  }

  std::ifstream in(fs::path(dir) / "instances.csv");
  if (!in) throw std::runtime_error("package: cannot read instances.csv in " + dir);
  std::string line;
  std::getline(in, line);
  if (line.rfind("# dirp-instances", 0) != 0)
    throw std::runtime_error("package: instances.csv missing version header in " + dir);
  std::getline(in, line);  // column header
  auto parse_vec = [](const std::string& s) {
    Vec v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ';'))
      if (!tok.empty()) v.push_back(std::stod(tok));
    return v;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[6];
    for (int i = 0; i < 6; ++i)
      if (!std::getline(ss, f[i], ','))
        throw std::runtime_error("package: truncated instance row in " + dir);
    Transition tr;
    tr.t = std::stol(f[0]);
    tr.source_cell = std::stoi(f[1]);
    tr.reward = std::stod(f[2]);
    tr.state = parse_vec(f[3]);
    tr.action = parse_vec(f[4]);
    tr.next_state = parse_vec(f[5]);
    if (tr.state.empty() || tr.action.empty() || tr.state.size() != tr.next_state.size())
      throw std::runtime_error("package: bad instance row in " + dir);
    pkg.instances.push_back(std::move(tr));
  }
  if (pkg.instances.size() != meta.at("instance_count").get<std::size_t>())
    throw std::runtime_error("package: instance count mismatch in " + dir);
  return pkg;
}

}  // namespace dirp
