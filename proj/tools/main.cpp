#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bst/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bstctr: sequential-recommendation CTR models, data generator, and benchmarks"};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_dir, data_path, checkpoint_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::optional<int> blocks;
  int n_seeds = 3;
  bool bench = false, assert_ordering = false;

  auto add_config_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run config; defaults fill missing parts");
    cmd->add_option("--seed", seed, "override every seed in the config");
  };
  auto add_model_flags = [&](CLI::App* cmd) {
    cmd->add_option("--model", model, "model kind: BST, WDL, WDL_SEQ, DIN_LITE");
    cmd->add_option("--blocks", blocks, "stacked transformer blocks for BST");
  };

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  add_config_flags(gen);
  gen->add_option("--out", out_dir, "output directory")->required();

  CLI::App* train = app.add_subcommand("train", "train one model, write a checkpoint");
  add_config_flags(train);
  add_model_flags(train);
  train->add_option("--data", data_dir, "directory holding train.jsonl")->required();
  train->add_option("--out", out_dir, "output directory")->required();

  CLI::App* eval = app.add_subcommand("eval", "score a dataset with a checkpoint");
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  eval->add_option("--data", data_path, "jsonl file to score")->required();
  eval->add_flag("--bench", bench, "also time single-example forwards");
  eval->add_option("--out", out_dir, "optional directory for metrics.csv");

  CLI::App* compare = app.add_subcommand("compare", "train and evaluate the full model lineup");
  add_config_flags(compare);
  compare->add_option("--data", data_dir, "directory holding train.jsonl and test.jsonl")
      ->required();
  compare->add_option("--out", out_dir, "output directory")->required();
  compare->add_option("--seeds", n_seeds, "training seeds per model");
  compare->add_flag("--assert-ordering", assert_ordering,
                    "exit nonzero unless BST_B1 tops both WDL variants on mean AUC");

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient audit");
  gradcheck->add_option("--model", model, "restrict to one kind");
  gradcheck->add_option("--blocks", blocks, "stacked transformer blocks for BST");

  CLI11_PARSE(app, argc, argv);

  try {
    bst::FlagOverrides flags{seed, model, blocks};
    if (gen->parsed()) return bst::cmd_gen(bst::resolve_run_config(config_path, flags), out_dir);
    if (train->parsed())
      return bst::cmd_train(bst::resolve_run_config(config_path, flags), data_dir, out_dir);
    if (eval->parsed()) return bst::cmd_eval(checkpoint_path, data_path, bench, out_dir);
    if (compare->parsed())
      return bst::cmd_compare(bst::resolve_run_config(config_path, flags), data_dir, out_dir,
                              n_seeds, assert_ordering);
    if (gradcheck->parsed()) return bst::cmd_gradcheck(model, blocks.value_or(1));
  } catch (const std::exception& e) {
    std::cerr << "bstctr: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
