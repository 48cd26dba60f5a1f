#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "dirp/experiment.hpp"
#include "dirp/plots.hpp"

namespace fs = std::filesystem;
using namespace dirp;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

int cmd_run(const std::string& config_path, ExperimentConfig cfg, const CLI::App& sub) {
  if (!config_path.empty()) {
    ExperimentConfig file_cfg = load_config(config_path);
    // flags given on the command line win over the file
    if (!sub.count("--scenario")) cfg.scenario = file_cfg.scenario;
    if (!sub.count("--scheme")) cfg.scheme = file_cfg.scheme;
    if (!sub.count("--reward")) cfg.reward = file_cfg.reward;
    if (!sub.count("--seed")) cfg.seeds = file_cfg.seeds;
    if (!sub.count("--expl-steps")) cfg.expl_steps = file_cfg.expl_steps;
    if (!sub.count("--train-steps")) cfg.train_steps = file_cfg.train_steps;
    if (!sub.count("--eval-steps")) cfg.eval_steps = file_cfg.eval_steps;
    if (!sub.count("--gen-expl-steps")) cfg.gen_expl_steps = file_cfg.gen_expl_steps;
    if (!sub.count("--gen-train-steps")) cfg.gen_train_steps = file_cfg.gen_train_steps;
    if (!sub.count("--offline-epochs")) cfg.offline_epochs = file_cfg.offline_epochs;
    if (!sub.count("--no-hint")) cfg.use_hint = file_cfg.use_hint;
    if (!sub.count("--out")) cfg.out_dir = file_cfg.out_dir;
  }

  const ExperimentResult res = run_experiment(cfg);
  for (const auto& s : res.per_seed)
    std::cout << cfg.scheme << " seed " << s.seed << ": mean eval global reward "
              << s.mean_eval_global << " over " << s.eval_rows << " rows\n";
  std::cout << cfg.scheme << " (" << reward_name(cfg.reward) << ", " << cfg.seeds.size()
            << " seeds): mean eval global reward " << res.mean_eval_global << "\n";
  std::cout << "wrote " << res.csv_paths.size() << " run logs under " << cfg.out_dir << "\n";
  return 0;
}

int cmd_plot(const std::string& csv_path, std::string out_dir, int cell, int window) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open " + csv_path);
  const LoadedMetrics m = read_metrics_csv(in);
  if (m.log.rows.empty()) throw std::runtime_error("no rows in " + csv_path);

  int num_slices = 0;
  for (const auto& r : m.log.rows) num_slices = std::max(num_slices, r.slice + 1);

  if (out_dir.empty()) out_dir = fs::path(csv_path).parent_path().string();
  if (out_dir.empty()) out_dir = ".";
  fs::create_directories(out_dir);
  const std::string stem = fs::path(csv_path).stem().string();

  const fs::path reward_path = fs::path(out_dir) / (stem + "-reward.svg");
  const fs::path sat_path = fs::path(out_dir) / (stem + "-satisfaction.svg");
  const fs::path act_path = fs::path(out_dir) / (stem + "-actions.svg");
  write_file(reward_path, reward_curve_svg(m.log, window, m.scheme + " global reward"));
  write_file(sat_path,
             satisfaction_survival_svg(m.log, num_slices, m.scheme + " eval satisfaction"));
  write_file(act_path, action_traffic_svg(m.log, cell, num_slices,
                                          m.scheme + " allocation vs load"));
  std::cout << "wrote " << reward_path.string() << "\n"
            << "wrote " << sat_path.string() << "\n"
            << "wrote " << act_path.string() << "\n";
  return 0;
}

int cmd_inspect(const std::string& path) {
  const Checkpoint ck = load_checkpoint(path);
  std::cout << path << "\n";
  std::size_t params = 0;
  std::cout << "layers:\n";
  for (const auto& l : ck.net.layers) {
    std::cout << "  " << l.in << " -> " << l.out << "  " << activation_name(l.act);
    if (l.act == Activation::softmax && l.groups > 1) std::cout << " x" << l.groups;
    std::cout << "\n";
    params += l.w.size() + l.b.size();
  }
  std::cout << "parameters: " << params << "\n";
  if (ck.adam) {
    std::cout << "optimizer: adam, step " << ck.adam->step << ", lr " << ck.adam->lr << "\n";
  } else {
    std::cout << "optimizer: none\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inter-slice radio resource partitioning experiments"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string config_path;
  std::string reward_name_arg = "maxmin";

  CLI::App* run = app.add_subcommand("run", "run an experiment and write logs + checkpoints");
  run->add_option("--config", config_path, "json config file");
  run->add_option("--scenario", cfg.scenario, "named scenario (default, small) or a json path");
  run->add_option("--scheme", cfg.scheme, "one of: dirp, bl-dist, bl-heur, bl-cen, gen, spec, "
                                          "spec-instance, spec-model, tl-dirp");
  run->add_option("--reward", reward_name_arg, "maxmin or log");
  run->add_option("--seed", cfg.seeds, "seeds to run (repeatable)");
  run->add_option("--expl-steps", cfg.expl_steps, "exploration steps, -1 for the scheme default");
  run->add_option("--train-steps", cfg.train_steps, "training steps");
  run->add_option("--eval-steps", cfg.eval_steps, "evaluation steps");
  run->add_option("--gen-expl-steps", cfg.gen_expl_steps, "generalist exploration steps");
  run->add_option("--gen-train-steps", cfg.gen_train_steps, "generalist training steps");
  run->add_option("--offline-epochs", cfg.offline_epochs, "tl-dirp offline finetune epochs");
  run->add_flag("--no-hint", "disable the demand-proportional exploration hint");
  run->add_option("--out", cfg.out_dir, "output directory");

  std::string csv_path, plot_out;
  int plot_cell = 0, plot_window = 50;
  CLI::App* plot = app.add_subcommand("plot", "render svg plots from a run log");
  plot->add_option("csv", csv_path, "metrics csv produced by run")->required();
  plot->add_option("--out", plot_out, "output directory (default: next to the csv)");
  plot->add_option("--cell", plot_cell, "cell for the allocation plot");
  plot->add_option("--window", plot_window, "moving-average window for the reward curve");

  std::string ckpt_path;
  CLI::App* inspect = app.add_subcommand("inspect-checkpoint", "describe a stored network");
  inspect->add_option("file", ckpt_path, "checkpoint json")->required();

  std::string dump_name = "small", dump_path;
  CLI::App* dump = app.add_subcommand("dump-scenario", "write a built-in scenario as json");
  dump->add_option("name", dump_name, "default or small");
  dump->add_option("--out", dump_path, "target file (default: <name>.json)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      cfg.reward = reward_from_name(reward_name_arg);
      if (run->count("--no-hint")) cfg.use_hint = false;
      return cmd_run(config_path, cfg, *run);
    }
    if (plot->parsed()) return cmd_plot(csv_path, plot_out, plot_cell, plot_window);
    if (inspect->parsed()) return cmd_inspect(ckpt_path);
    if (dump->parsed()) {
      if (dump_path.empty()) dump_path = dump_name + ".json";
      save_scenario(dump_path, load_scenario(dump_name));
      std::cout << "wrote " << dump_path << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
