#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bst/config.hpp"

namespace bst {

// CLI-flag overrides applied on top of the config file (or the defaults).
struct FlagOverrides {
  std::optional<std::uint64_t> seed;   // replaces gen/model/train seeds
  std::optional<std::string> model;    // BST | WDL | WDL_SEQ | DIN_LITE
  std::optional<int> blocks;           // transformer blocks for BST
};

RunConfig resolve_run_config(const std::string& config_path, const FlagOverrides& flags);

// WDL / WDL_SEQ / DIN_LITE, or BST_B<blocks> so table rows stay distinct.
std::string model_label(const ModelConfig& config);

// Each command returns a process exit code and throws on hard errors; the
// entry point turns exceptions into a one-line message and exit 1.
int cmd_gen(const RunConfig& run, const std::string& out_dir);
int cmd_train(const RunConfig& run, const std::string& data_dir, const std::string& out_dir);
int cmd_eval(const std::string& checkpoint_path, const std::string& data_path, bool bench,
             const std::string& out_dir);
int cmd_compare(const RunConfig& run, const std::string& data_dir, const std::string& out_dir,
                int n_seeds, bool assert_ordering);
int cmd_gradcheck(const std::optional<std::string>& only_model, int blocks);

}  // namespace bst
