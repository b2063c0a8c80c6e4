#include "bst/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include "bst/checkpoint.hpp"
#include "bst/gradcheck.hpp"
#include "bst/jsonl.hpp"
#include "bst/metrics.hpp"
#include "bst/rng.hpp"
#include "bst/synth.hpp"
#include "bst/train.hpp"
#include "json.hpp"

namespace bst {

namespace {

using nlohmann::json;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out.flush()) throw std::runtime_error("failed writing " + path);
}

void write_manifest(const std::string& out_dir, const std::string& command, json extra) {
  extra["command"] = command;
  write_text_file(out_dir + "/manifest.json", extra.dump(2) + "\n");
}

std::vector<Example> load_examples(const std::string& path) { return read_jsonl(path); }

// averaged over seeds so the summary mirrors a results table's single row
EvalReport mean_report(const std::vector<EvalReport>& reports) {
  EvalReport mean;
  for (const EvalReport& r : reports) {
    mean.auc += r.auc;
    mean.logloss += r.logloss;
    mean.rt_mean_ms += r.rt_mean_ms;
    mean.rt_p95_ms += r.rt_p95_ms;
  }
  double k = static_cast<double>(reports.size());
  mean.auc /= k;
  mean.logloss /= k;
  mean.rt_mean_ms /= k;
  mean.rt_p95_ms /= k;
  mean.n_examples = reports.empty() ? 0 : reports.front().n_examples;
  return mean;
}

}  // namespace

RunConfig resolve_run_config(const std::string& config_path, const FlagOverrides& flags) {
  RunConfig run = config_path.empty() ? default_run_config() : load_run_config(config_path);
  if (flags.seed) {
    run.gen.seed = *flags.seed;
    run.model.seed = *flags.seed;
    run.train.seed = *flags.seed;
  }
  if (flags.model) run.model.kind = model_kind_from_string(*flags.model);
  if (flags.blocks) run.model.block.blocks = *flags.blocks;
  return run;
}

std::string model_label(const ModelConfig& config) {
  if (config.kind == ModelKind::kBst)
    return "BST_B" + std::to_string(config.block.blocks);
  return to_string(config.kind);
}

int cmd_gen(const RunConfig& run, const std::string& out_dir) {
  validate_gen_config(run.gen);
  ensure_dir(out_dir);
  Dataset data = generate_dataset(run.gen);
  write_jsonl(data.train, out_dir + "/train.jsonl");
  write_jsonl(data.test, out_dir + "/test.jsonl");
  write_manifest(out_dir, "gen",
                 json{{"config", run_config_to_json(run)},
                      {"expected_positive_rate", data.expected_positive_rate}});
  std::cout << "wrote " << data.train.size() << " train / " << data.test.size()
            << " test examples to " << out_dir << " (expected positive rate "
            << data.expected_positive_rate << ")\n";
  return 0;
}

int cmd_train(const RunConfig& run, const std::string& data_dir, const std::string& out_dir) {
  std::vector<Example> train_data = load_examples(data_dir + "/train.jsonl");
  ensure_dir(out_dir);
  TrainResult result = train_model(train_data, run.model, run.train);

  std::string checkpoint_path = out_dir + "/checkpoint.json";
  save_checkpoint(checkpoint_path, run.model, result.params);

  std::ostringstream loss_csv;
  loss_csv << "epoch,loss\n";
  loss_csv.precision(6);
  loss_csv << std::fixed;
  for (size_t e = 0; e < result.epoch_loss.size(); ++e)
    loss_csv << (e + 1) << ',' << result.epoch_loss[e] << '\n';
  write_text_file(out_dir + "/loss.csv", loss_csv.str());

  write_manifest(out_dir, "train",
                 json{{"config", run_config_to_json(run)}, {"data", data_dir}});
  std::cout << "trained " << model_label(run.model) << " on " << train_data.size()
            << " examples; final epoch loss " << result.epoch_loss.back() << "; checkpoint at "
            << checkpoint_path << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_path, bool bench,
             const std::string& out_dir) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  std::vector<Example> data = load_examples(data_path);
  int bench_reps = 0;
  if (bench) {
    // aim for >= 1000 timed forwards without rescanning a big test set
    size_t want = 1000;
    bench_reps = static_cast<int>(std::max<size_t>(1, (want + data.size() - 1) / data.size()));
  }
  EvalReport report = evaluate(ckpt.params, ckpt.config, data, bench_reps);
  std::string csv = eval_csv_header() + "\n" + eval_csv_row(model_label(ckpt.config), report) + "\n";
  std::cout << csv;
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    write_text_file(out_dir + "/metrics.csv", csv);
    write_manifest(out_dir, "eval",
                   json{{"checkpoint", checkpoint_path}, {"data", data_path}, {"bench", bench}});
  }
  return 0;
}

int cmd_compare(const RunConfig& run, const std::string& data_dir, const std::string& out_dir,
                int n_seeds, bool assert_ordering) {
  if (n_seeds < 1) throw std::invalid_argument("compare: need at least one seed");
  std::vector<Example> train_data = load_examples(data_dir + "/train.jsonl");
  std::vector<Example> test_data = load_examples(data_dir + "/test.jsonl");
  ensure_dir(out_dir);

  struct Entry {
    ModelKind kind;
    int blocks;
  };
  const std::vector<Entry> entries = {{ModelKind::kWdl, 1},    {ModelKind::kWdlSeq, 1},
                                      {ModelKind::kDinLite, 1}, {ModelKind::kBst, 1},
                                      {ModelKind::kBst, 2},    {ModelKind::kBst, 3}};

  // bench on a slice: RT is per-example and stable, training dominates runtime
  std::vector<Example> bench_slice(test_data.begin(),
                                   test_data.begin() + std::min<size_t>(test_data.size(), 250));

  std::ostringstream rows;
  rows << "model,seed,auc,logloss,rt_mean_ms,rt_p95_ms,n\n";
  std::ostringstream summary;
  summary << eval_csv_header() << '\n';
  std::map<std::string, double> mean_auc;

  for (const Entry& entry : entries) {
    ModelConfig mc = run.model;
    mc.kind = entry.kind;
    mc.block.blocks = entry.blocks;
    std::string label = model_label(mc);
    std::vector<EvalReport> reports;
    for (int s = 0; s < n_seeds; ++s) {
      std::uint64_t seed = run.train.seed + static_cast<std::uint64_t>(s);
      mc.seed = seed;
      TrainConfig tc = run.train;
      tc.seed = seed;
      TrainResult result = train_model(train_data, mc, tc);
      EvalReport report = evaluate(result.params, mc, test_data);
      RtStats rt = bench_rt(result.params, mc, bench_slice, 2);
      report.rt_mean_ms = rt.mean_ms;
      report.rt_p95_ms = rt.p95_ms;
      reports.push_back(report);
      std::ostringstream row;
      row.precision(6);
      row << std::fixed << label << ',' << seed << ',' << report.auc << ',' << report.logloss
          << ',' << report.rt_mean_ms << ',' << report.rt_p95_ms << ',' << report.n_examples;
      rows << row.str() << '\n';
      std::cout << row.str() << '\n';
    }
    EvalReport mean = mean_report(reports);
    mean_auc[label] = mean.auc;
    summary << eval_csv_row(label, mean) << '\n';
  }

  write_text_file(out_dir + "/compare.csv", rows.str());
  write_text_file(out_dir + "/summary.csv", summary.str());
  write_manifest(out_dir, "compare",
                 json{{"config", run_config_to_json(run)},
                      {"data", data_dir},
                      {"seeds", n_seeds}});
  std::cout << summary.str();

  if (assert_ordering) {
    double bst = mean_auc.at("BST_B1"), wdl_seq = mean_auc.at("WDL_SEQ"), wdl = mean_auc.at("WDL");
    if (!(bst > wdl_seq && bst > wdl)) {
      std::cout << "ordering assertion failed: mean AUC BST_B1=" << bst
                << " does not top WDL_SEQ=" << wdl_seq << " and WDL=" << wdl << "\n";
      return 1;
    }
    std::cout << "ordering assertion passed: BST_B1 tops both WDL variants\n";
  }
  return 0;
}

int cmd_gradcheck(const std::optional<std::string>& only_model, int blocks) {
  FeatureSchema schema;
  schema.item_vocab = 40;
  schema.item_width = 4;
  schema.cat_vocab = 7;
  schema.cat_width = 2;
  schema.pos_buckets = 8;
  schema.pos_width = 2;
  schema.seq_len = 5;
  schema.fields = {{"gender", 3, 2}};
  schema.crosses = {{"gender", "item_id", 31, 2}};

  Example full;
  full.user_id = 1;
  full.other = {{"gender", 2}};
  full.history = {{5, 2, 100}, {9, 3, 150}, {14, 1, 260}, {3, 4, 290}, {21, 5, 333}};
  full.target = {11, 2, 400};
  full.label = 1;
  Example padded = full;
  padded.history = {{5, 2, 100}, {9, 3, 150}};
  padded.label = 0;

  bool all_pass = true;
  for (ModelKind kind :
       {ModelKind::kBst, ModelKind::kWdl, ModelKind::kWdlSeq, ModelKind::kDinLite}) {
    if (only_model && to_string(kind) != *only_model) continue;
    ModelConfig config;
    config.schema = schema;
    config.block.d_model = schema.d_model();
    config.block.heads = 2;
    config.block.d_ff = 16;
    config.block.blocks = kind == ModelKind::kBst ? blocks : 1;
    config.block.dropout_rate = 0.1;  // inert in eval mode, which is the contract
    config.mlp_hidden = {16, 8, 4};
    config.kind = kind;
    config.seed = 17;
    NamedTensors params = init_params(config);

    double max_err = 0.0;
    int checked = 0;
    GradcheckEntry worst;
    for (const Example* e : {&full, &padded}) {
      ForwardFn fn = [&config, e](Tape& tape, const NamedTensors& p) {
        Rng rng = make_rng(0);
        Var prob = model_forward(tape, p, *e, config, Mode::kEval, rng);
        return bce_loss(prob, {e->label});
      };
      GradcheckReport report = grad_check(fn, params, 1e-5);
      checked += report.n_checked;
      if (report.max_err > max_err) {
        max_err = report.max_err;
        worst = report.worst;
      }
    }
    bool pass = max_err < 1e-4;
    all_pass = all_pass && pass;
    std::cout << "gradcheck " << model_label(config) << ": max_err " << max_err << " over "
              << checked << " entries (worst " << worst.name << "[" << worst.index
              << "]) -> " << (pass ? "PASS" : "FAIL") << "\n";
  }
  return all_pass ? 0 : 1;
}

}  // namespace bst
