#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "dirp/env.hpp"

namespace dirp {

namespace detail {

inline void require_keys(const nlohmann::json& j, std::initializer_list<const char*> keys,
                         const std::string& where) {
  for (const char* k : keys)
    if (!j.contains(k)) throw std::runtime_error("scenario: missing key '" + std::string(k) +
                                                 "' in " + where);
}

inline std::vector<std::vector<double>> read_mask_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scenario: cannot open mask csv " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json slices = nlohmann::json::array();
  for (const auto& s : sc.slices)
    slices.push_back({{"name", s.name},
                      {"thr_req_bps", s.thr_req_bps},
                      {"delay_req_s", s.delay_req_s},
                      {"offered_rate_bps", s.offered_rate_bps},
                      {"max_users_per_group", s.max_users_per_group},
                      {"packet_bits", s.packet_bits}});
  return nlohmann::json{
      {"name", sc.name},
      {"topology",
       {{"num_cells", sc.topology.num_cells},
        {"num_slices", sc.topology.num_slices},
        {"bandwidth_hz", sc.topology.bandwidth_hz},
        {"tx_power_w", sc.topology.tx_power_w},
        {"noise_w", sc.topology.noise_w},
        {"gain", sc.topology.gain},
        {"neighbors", sc.topology.neighbors}}},
      {"slices", slices},
      {"mask", {{"values", sc.mask.values}}}};
}

inline Scenario scenario_from_json(const nlohmann::json& j, const std::string& base_dir = ".") {
  detail::require_keys(j, {"topology", "slices", "mask"}, "scenario root");
  Scenario sc;
  sc.name = j.value("name", "custom");
  const auto& jt = j.at("topology");
  detail::require_keys(jt,
                       {"num_cells", "num_slices", "bandwidth_hz", "tx_power_w", "noise_w",
                        "gain", "neighbors"},
                       "topology");
  sc.topology.num_cells = jt.at("num_cells").get<int>();
  sc.topology.num_slices = jt.at("num_slices").get<int>();
  sc.topology.bandwidth_hz = jt.at("bandwidth_hz").get<double>();
  sc.topology.tx_power_w = jt.at("tx_power_w").get<double>();
  sc.topology.noise_w = jt.at("noise_w").get<double>();
  sc.topology.gain = jt.at("gain").get<std::vector<std::vector<double>>>();
  sc.topology.neighbors = jt.at("neighbors").get<std::vector<std::vector<int>>>();
  for (std::size_t k = 0; k < sc.topology.neighbors.size(); ++k)
    for (int n : sc.topology.neighbors[k])
      if (n < 0 || n >= sc.topology.num_cells)
        throw std::runtime_error("scenario: cell " + std::to_string(k) +
                                 " neighbor list references unknown cell " + std::to_string(n));
  for (const auto& js : j.at("slices")) {
    detail::require_keys(js,
                         {"thr_req_bps", "delay_req_s", "offered_rate_bps",
                          "max_users_per_group", "packet_bits"},
                         "slice");
    SliceSpec s;
    s.name = js.value("name", "slice");
    s.thr_req_bps = js.at("thr_req_bps").get<double>();
    s.delay_req_s = js.at("delay_req_s").get<double>();
    s.offered_rate_bps = js.at("offered_rate_bps").get<double>();
    s.max_users_per_group = js.at("max_users_per_group").get<int>();
    s.packet_bits = js.at("packet_bits").get<double>();
    sc.slices.push_back(std::move(s));
  }
  const auto& jm = j.at("mask");
  if (jm.contains("values"))
    sc.mask.values = jm.at("values").get<std::vector<std::vector<double>>>();
  else if (jm.contains("csv"))
    sc.mask.values =
        detail::read_mask_csv((std::filesystem::path(base_dir) / jm.at("csv").get<std::string>())
                                  .string());
  else
    throw std::runtime_error("scenario: mask needs 'values' or 'csv'");
  validate_scenario(sc);
  return sc;
}

// Accepts the built-in names or a path to a scenario json.
inline Scenario load_scenario(const std::string& name_or_path) {
  if (name_or_path == "default") return default_scenario();
  if (name_or_path == "small") return small_scenario();
  std::ifstream in(name_or_path);
  if (!in) throw std::runtime_error("scenario: no built-in or file named " + name_or_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("scenario: parse error in " + name_or_path + ": " + e.what());
  }
  return scenario_from_json(j, std::filesystem::path(name_or_path).parent_path().string());
}

inline void save_scenario(const std::string& path, const Scenario& sc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("scenario: cannot write " + path);
  out << scenario_to_json(sc).dump(2) << "\n";
}

}  // namespace dirp
