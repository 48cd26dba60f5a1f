#pragma once

#include <fstream>

#include "dirp/checkpoint.hpp"
#include "dirp/mdp.hpp"
#include "dirp/transfer.hpp"

namespace dirp {

inline const std::vector<std::string>& known_schemes() {
  static const std::vector<std::string> v = {"dirp",         "bl-dist", "bl-heur",
                                             "bl-cen",       "gen",     "spec",
                                             "spec-instance", "spec-model", "tl-dirp"};
  return v;
}

// Schemes that run the generalist-to-specialist pipeline.
inline std::optional<TransferScheme> transfer_scheme_of(const std::string& scheme) {
  if (scheme == "gen") return TransferScheme::gen_only;
  if (scheme == "spec") return TransferScheme::spec_full;
  if (scheme == "spec-instance") return TransferScheme::spec_instance_only;
  if (scheme == "spec-model") return TransferScheme::spec_model_only;
  if (scheme == "tl-dirp") return TransferScheme::tl_dirp;
  return std::nullopt;
}

struct ExperimentConfig {
  std::string scenario = "default";  // named scenario or a json path
  std::string scheme = "dirp";
  RewardKind reward = RewardKind::max_min;
  std::vector<std::uint64_t> seeds = {1};
  long expl_steps = -1;  // -1: 500 for bl-cen, 100 otherwise
  long train_steps = 5000;
  long eval_steps = 500;
  long gen_expl_steps = 100;   // transfer schemes only
  long gen_train_steps = 2000;
  int offline_epochs = kOfflineEpochs;
  bool use_hint = true;
  std::string out_dir = "results";

  long resolved_expl_steps() const {
    if (expl_steps >= 0) return expl_steps;
    return scheme == "bl-cen" ? 500 : 100;
  }
};

inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw std::runtime_error("config: expected a json object");
  ExperimentConfig cfg;
  for (const auto& [key, val] : j.items()) {
    if (key == "scenario") {
      cfg.scenario = val.get<std::string>();
    } else if (key == "scheme") {
      cfg.scheme = val.get<std::string>();
    } else if (key == "reward") {
      cfg.reward = reward_from_name(val.get<std::string>());
    } else if (key == "seeds") {
      cfg.seeds = val.get<std::vector<std::uint64_t>>();
    } else if (key == "expl_steps") {
      cfg.expl_steps = val.get<long>();
    } else if (key == "train_steps") {
      cfg.train_steps = val.get<long>();
    } else if (key == "eval_steps") {
      cfg.eval_steps = val.get<long>();
    } else if (key == "gen_expl_steps") {
      cfg.gen_expl_steps = val.get<long>();
    } else if (key == "gen_train_steps") {
      cfg.gen_train_steps = val.get<long>();
    } else if (key == "offline_epochs") {
      cfg.offline_epochs = val.get<int>();
    } else if (key == "use_hint") {
      cfg.use_hint = val.get<bool>();
    } else if (key == "out_dir") {
      cfg.out_dir = val.get<std::string>();
    } else {
      throw std::runtime_error("config: unknown key \"" + key + "\"");
    }
  }

  bool known = false;
  for (const auto& s : known_schemes()) known = known || s == cfg.scheme;
  if (!known) throw std::runtime_error("config: unknown scheme \"" + cfg.scheme + "\"");
  if (cfg.seeds.empty()) throw std::runtime_error("config: seeds must not be empty");
  if (cfg.train_steps < 0 || cfg.eval_steps < 0 || cfg.gen_expl_steps < 0 ||
      cfg.gen_train_steps < 0)
    throw std::runtime_error("config: negative step count");
  if (cfg.offline_epochs < 0) throw std::runtime_error("config: negative offline_epochs");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config: " + path + " is not valid json: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace dirp
