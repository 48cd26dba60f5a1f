#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>

#include "dirp/mlp.hpp"
#include "dirp/replay.hpp"

namespace dirp {

struct Td3Hyper {
  double gamma = 0.1;
  double tau = 0.005;
  double actor_lr = 5e-4;
  double critic_lr = 1e-3;
  int batch_size = 32;
  double smooth_sigma = 0.1;  // target policy smoothing noise
  double smooth_clip = 0.25;
  int policy_delay = 2;
  double explore_sigma = 0.2;  // logit noise of the behaviour policy
};

// Twin-critic deterministic policy learner. The actor ends in a grouped
// softmax so its output always lies on the slice simplex (one group per
// controlled cell).
struct Td3Agent {
  Td3Hyper hyper;
  int state_dim = 0;
  int action_dim = 0;
  int action_groups = 1;
  Mlp actor, critic1, critic2;
  Mlp target_actor, target_critic1, target_critic2;
  AdamState actor_opt, critic1_opt, critic2_opt;
  std::mt19937_64 rng;
  long critic_updates = 0;
  long actor_updates = 0;
  // bookkeeping for the twin minimum: how often the twins disagreed and how
  // often the smaller one entered the target
  long twin_disagreements = 0;
  long twin_min_taken = 0;
};

inline Td3Agent make_td3_agent(int state_dim, int action_dim, int action_groups,
                               const std::vector<int>& actor_hidden,
                               const std::vector<int>& critic_hidden, const Td3Hyper& hyper,
                               std::uint64_t seed) {
  Td3Agent a;
  a.hyper = hyper;
  a.state_dim = state_dim;
  a.action_dim = action_dim;
  a.action_groups = action_groups;
  a.rng.seed(seed);

  std::vector<int> adims = {state_dim};
  adims.insert(adims.end(), actor_hidden.begin(), actor_hidden.end());
  adims.push_back(action_dim);
  std::vector<int> cdims = {state_dim + action_dim};
  cdims.insert(cdims.end(), critic_hidden.begin(), critic_hidden.end());
  cdims.push_back(1);

  a.actor = make_mlp(adims, Activation::softmax, action_groups, a.rng);
  a.critic1 = make_mlp(cdims, Activation::linear, 1, a.rng);
  a.critic2 = make_mlp(cdims, Activation::linear, 1, a.rng);
  a.target_actor = a.actor;
  a.target_critic1 = a.critic1;
  a.target_critic2 = a.critic2;
  a.actor_opt = AdamState::make(a.actor, hyper.actor_lr);
  a.critic1_opt = AdamState::make(a.critic1, hyper.critic_lr);
  a.critic2_opt = AdamState::make(a.critic2, hyper.critic_lr);
  return a;
}

inline Vec concat(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline Vec policy_action(const Td3Agent& a, const Vec& state) { return forward(a.actor, state); }

// Behaviour policy with exploration noise on the output logits, then the
// grouped softmax, so the perturbed action still sums to one per group.
inline Vec noisy_policy_action(Td3Agent& a, const Vec& state, double sigma) {
  Tape tape;
  forward(a.actor, state, tape);
  Vec logits = tape.z.back();
  for (auto& v : logits) v += normal(a.rng, sigma);
  return decoupled_softmax(logits, a.action_groups);
}

namespace detail {
// clip to [0,1] and renormalize any group whose sum drifted beyond 1e-9
inline void project_to_simplex(Vec& a, int groups) {
  const std::size_t block = a.size() / static_cast<std::size_t>(groups);
  for (auto& v : a) v = std::clamp(v, 0.0, 1.0);
  for (int g = 0; g < groups; ++g) {
    const std::size_t base = static_cast<std::size_t>(g) * block;
    double sum = 0.0;
    for (std::size_t i = 0; i < block; ++i) sum += a[base + i];
    if (std::fabs(sum - 1.0) <= 1e-9) continue;
    if (sum <= 1e-12) {
      for (std::size_t i = 0; i < block; ++i) a[base + i] = 1.0 / static_cast<double>(block);
    } else {
      for (std::size_t i = 0; i < block; ++i) a[base + i] /= sum;
    }
  }
}
}  // namespace detail

// Target action with clipped smoothing noise. With sigma = 0 this returns
// the target actor's output untouched.
inline Vec target_action(Td3Agent& a, const Vec& next_state) {
  Vec act = forward(a.target_actor, next_state);
  if (a.hyper.smooth_sigma > 0.0) {
    for (auto& v : act) {
      const double eps =
          std::clamp(normal(a.rng, a.hyper.smooth_sigma), -a.hyper.smooth_clip, a.hyper.smooth_clip);
      v += eps;
    }
    detail::project_to_simplex(act, a.action_groups);
  }
  return act;
}

// TD target with the twin minimum, y = r + gamma * min(Q1', Q2').
inline double td_target(Td3Agent& a, double reward, const Vec& next_state) {
  const Vec act = target_action(a, next_state);
  const Vec x = concat(next_state, act);
  const double q1 = forward(a.target_critic1, x)[0];
  const double q2 = forward(a.target_critic2, x)[0];
  const double used = std::min(q1, q2);
  if (q1 != q2) {
    a.twin_disagreements += 1;
    if (used < std::max(q1, q2)) a.twin_min_taken += 1;
  }
  return reward + a.hyper.gamma * used;
}

// One gradient step on both critics against the shared TD targets.
// Returns the pre-update MSE averaged over the twins.
inline double update_critics(Td3Agent& a, std::span<const Transition> batch) {
  if (batch.empty()) throw std::invalid_argument("update_critics: empty batch");
  const double inv = 1.0 / static_cast<double>(batch.size());
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (const auto& tr : batch) targets.push_back(td_target(a, tr.reward, tr.next_state));

  double loss_sum = 0.0;
  for (Mlp* critic : {&a.critic1, &a.critic2}) {
    Grad g = Grad::zeros_like(*critic);
    double mse = 0.0;
    Tape tape;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Vec x = concat(batch[i].state, batch[i].action);
      forward(*critic, x, tape);
      const double err = tape.y[0] - targets[i];
      mse += err * err * inv;
      backward(*critic, tape, {2.0 * err * inv}, g);
    }
    if (!std::isfinite(mse)) throw std::runtime_error("update_critics: nonfinite loss");
    AdamState& opt = (critic == &a.critic1) ? a.critic1_opt : a.critic2_opt;
    adam_step(*critic, g, opt);
    loss_sum += mse;
  }
  a.critic_updates += 1;
  return 0.5 * loss_sum;
}

// Delayed actor step plus soft target refresh. Runs only when step_index is
// a multiple of the policy delay; otherwise leaves everything untouched and
// reports nothing.
inline std::optional<double> update_actor_and_targets(Td3Agent& a,
                                                      std::span<const Transition> batch,
                                                      long step_index) {
  if (a.hyper.policy_delay <= 0) throw std::invalid_argument("policy delay must be positive");
  if (step_index % a.hyper.policy_delay != 0) return std::nullopt;
  if (batch.empty()) throw std::invalid_argument("update_actor: empty batch");

  const double inv = 1.0 / static_cast<double>(batch.size());
  Grad actor_grad = Grad::zeros_like(a.actor);
  Grad scratch = Grad::zeros_like(a.critic1);  // thrown away, only dQ/da matters
  double q_mean = 0.0;
  Tape atape, qtape;
  for (const auto& tr : batch) {
    forward(a.actor, tr.state, atape);
    const Vec x = concat(tr.state, atape.y);
    forward(a.critic1, x, qtape);
    q_mean += qtape.y[0] * inv;
    const Vec dx = backward(a.critic1, qtape, {-inv}, scratch);
    const Vec da(dx.begin() + a.state_dim, dx.end());
    backward(a.actor, atape, da, actor_grad);
  }
  const double loss = -q_mean;
  if (!std::isfinite(loss)) throw std::runtime_error("update_actor: nonfinite loss");
  adam_step(a.actor, actor_grad, a.actor_opt);
  a.actor_updates += 1;

  soft_update(a.target_actor, a.actor, a.hyper.tau);
  soft_update(a.target_critic1, a.critic1, a.hyper.tau);
  soft_update(a.target_critic2, a.critic2, a.hyper.tau);
  return loss;
}

}  // namespace dirp
