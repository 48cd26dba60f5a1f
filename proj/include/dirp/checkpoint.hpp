#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "dirp/mlp.hpp"

namespace dirp {

using json = nlohmann::json;

inline json mlp_to_json(const Mlp& net) {
  json layers = json::array();
  for (const auto& l : net.layers) {
    layers.push_back({{"in", l.in},
                      {"out", l.out},
                      {"act", activation_name(l.act)},
                      {"groups", l.groups},
                      {"w", l.w},
                      {"b", l.b}});
  }
  return json{{"format", "dirp-mlp"}, {"version", 1}, {"layers", layers}};
}

inline Mlp mlp_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "dirp-mlp")
    throw std::runtime_error("checkpoint: missing dirp-mlp format tag");
  if (j.value("version", 0) != 1) throw std::runtime_error("checkpoint: unsupported version");
  Mlp net;
  for (const auto& jl : j.at("layers")) {
    Layer l;
    l.in = jl.at("in").get<int>();
    l.out = jl.at("out").get<int>();
    l.act = activation_from_name(jl.at("act").get<std::string>());
    l.groups = jl.at("groups").get<int>();
    l.w = jl.at("w").get<Vec>();
    l.b = jl.at("b").get<Vec>();
    if (l.in <= 0 || l.out <= 0) throw std::runtime_error("checkpoint: bad layer dims");
    if (l.w.size() != static_cast<std::size_t>(l.in) * static_cast<std::size_t>(l.out))
      throw std::runtime_error("checkpoint: weight count does not match dims");
    if (l.b.size() != static_cast<std::size_t>(l.out))
      throw std::runtime_error("checkpoint: bias count does not match dims");
    if (l.act == Activation::softmax && (l.groups <= 0 || l.out % l.groups != 0))
      throw std::runtime_error("checkpoint: bad softmax group count");
    net.layers.push_back(std::move(l));
  }
  if (net.layers.empty()) throw std::runtime_error("checkpoint: no layers");
  for (std::size_t i = 0; i + 1 < net.layers.size(); ++i) {
    if (net.layers[i].out != net.layers[i + 1].in)
      throw std::runtime_error("checkpoint: layer dims do not chain");
    if (net.layers[i].act == Activation::softmax)
      throw std::runtime_error("checkpoint: softmax allowed on the output layer only");
  }
  return net;
}

inline json adam_to_json(const AdamState& s) {
  return json{{"lr", s.lr},     {"beta1", s.beta1}, {"beta2", s.beta2}, {"eps", s.eps},
              {"step", s.step}, {"mw", s.mw},       {"vw", s.vw},       {"mb", s.mb},
              {"vb", s.vb}};
}

inline AdamState adam_from_json(const json& j, const Mlp& net) {
  AdamState s;
  s.lr = j.at("lr").get<double>();
  s.beta1 = j.at("beta1").get<double>();
  s.beta2 = j.at("beta2").get<double>();
  s.eps = j.at("eps").get<double>();
  s.step = j.at("step").get<long>();
  s.mw = j.at("mw").get<std::vector<Vec>>();
  s.vw = j.at("vw").get<std::vector<Vec>>();
  s.mb = j.at("mb").get<std::vector<Vec>>();
  s.vb = j.at("vb").get<std::vector<Vec>>();
  if (s.mw.size() != net.layers.size()) throw std::runtime_error("checkpoint: adam layer mismatch");
  for (std::size_t i = 0; i < net.layers.size(); ++i)
    if (s.mw[i].size() != net.layers[i].w.size() || s.vw[i].size() != net.layers[i].w.size() ||
        s.mb[i].size() != net.layers[i].b.size() || s.vb[i].size() != net.layers[i].b.size())
      throw std::runtime_error("checkpoint: adam moment shape mismatch");
  return s;
}

struct Checkpoint {
  Mlp net;
  std::optional<AdamState> adam;
};

inline void save_checkpoint(const std::string& path, const Mlp& net,
                            const AdamState* adam = nullptr) {
  json j = mlp_to_json(net);
  if (adam != nullptr) j["adam"] = adam_to_json(*adam);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump(2) << "\n";
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("checkpoint parse error in " + path + ": " + e.what());
  }
  Checkpoint c;
  c.net = mlp_from_json(j);
  if (j.contains("adam")) c.adam = adam_from_json(j.at("adam"), c.net);
  return c;
}

}  // namespace dirp
