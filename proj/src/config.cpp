#include "bst/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace bst {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw std::invalid_argument(where + ": unknown key \"" + key + "\"");
}

}  // namespace

json schema_to_json(const FeatureSchema& s) {
  json fields = json::array();
  for (const FieldSpec& f : s.fields)
    fields.push_back({{"name", f.name}, {"vocab", f.vocab}, {"width", f.width}});
  json crosses = json::array();
  for (const CrossSpec& c : s.crosses)
    crosses.push_back(
        {{"a", c.a}, {"b", c.b}, {"table_size", c.table_size}, {"width", c.width}});
  return json{{"item_vocab", s.item_vocab}, {"item_width", s.item_width},
              {"cat_vocab", s.cat_vocab},   {"cat_width", s.cat_width},
              {"pos_buckets", s.pos_buckets}, {"pos_width", s.pos_width},
              {"seq_len", s.seq_len},       {"fields", std::move(fields)},
              {"crosses", std::move(crosses)}};
}

FeatureSchema schema_from_json(const json& j) {
  check_keys(j,
             {"item_vocab", "item_width", "cat_vocab", "cat_width", "pos_buckets", "pos_width",
              "seq_len", "fields", "crosses"},
             "schema");
  FeatureSchema s;
  s.item_vocab = j.at("item_vocab").get<int>();
  s.item_width = j.at("item_width").get<int>();
  s.cat_vocab = j.at("cat_vocab").get<int>();
  s.cat_width = j.at("cat_width").get<int>();
  s.pos_buckets = j.value("pos_buckets", 12);
  s.pos_width = j.at("pos_width").get<int>();
  s.seq_len = j.at("seq_len").get<int>();
  for (const json& f : j.value("fields", json::array())) {
    check_keys(f, {"name", "vocab", "width"}, "schema field");
    s.fields.push_back(
        {f.at("name").get<std::string>(), f.at("vocab").get<int>(), f.at("width").get<int>()});
  }
  for (const json& c : j.value("crosses", json::array())) {
    check_keys(c, {"a", "b", "table_size", "width"}, "schema cross");
    s.crosses.push_back({c.at("a").get<std::string>(), c.at("b").get<std::string>(),
                         c.at("table_size").get<int>(), c.at("width").get<int>()});
  }
  validate_schema(s);
  return s;
}

json block_to_json(const BlockConfig& b) {
  return json{{"d_model", b.d_model},       {"heads", b.heads},
              {"d_ff", b.d_ff},             {"dropout", b.dropout_rate},
              {"leaky_slope", b.leaky_slope}, {"eps", b.eps},
              {"blocks", b.blocks}};
}

BlockConfig block_from_json(const json& j) {
  check_keys(j, {"d_model", "heads", "d_ff", "dropout", "leaky_slope", "eps", "blocks"}, "block");
  BlockConfig b;
  b.d_model = j.value("d_model", 0);
  b.heads = j.value("heads", 2);
  b.d_ff = j.value("d_ff", 0);
  b.dropout_rate = j.value("dropout", 0.1);
  b.leaky_slope = j.value("leaky_slope", 0.01);
  b.eps = j.value("eps", 1e-8);
  b.blocks = j.value("blocks", 1);
  return b;
}

json model_config_to_json(const ModelConfig& c) {
  return json{{"kind", to_string(c.kind)},
              {"schema", schema_to_json(c.schema)},
              {"block", block_to_json(c.block)},
              {"mlp_hidden", c.mlp_hidden},
              {"seed", c.seed}};
}

ModelConfig model_config_from_json(const json& j) {
  check_keys(j, {"kind", "schema", "block", "mlp_hidden", "seed"}, "model config");
  ModelConfig c;
  c.kind = model_kind_from_string(j.at("kind").get<std::string>());
  c.schema = schema_from_json(j.at("schema"));
  c.block = block_from_json(j.at("block"));
  auto hidden = j.at("mlp_hidden").get<std::vector<int>>();
  if (hidden.size() != 3)
    throw std::invalid_argument("model config: mlp_hidden must have exactly 3 widths");
  std::copy(hidden.begin(), hidden.end(), c.mlp_hidden.begin());
  c.seed = j.value("seed", std::uint64_t{1});
  validate_model_config(c);
  return c;
}

json gen_config_to_json(const GenConfig& g) {
  json profile = json::array();
  for (const auto& [name, n] : g.profile_fields)
    profile.push_back({{"name", name}, {"values", n}});
  return json{{"n_users", g.n_users},
              {"n_items", g.n_items},
              {"n_categories", g.n_categories},
              {"seq_len_min", g.seq_len_min},
              {"seq_len_max", g.seq_len_max},
              {"dt_min", g.dt_min},
              {"dt_max", g.dt_max},
              {"alpha", g.alpha},
              {"backbone_sharpness", g.backbone_sharpness},
              {"lambda_recency", g.lambda_recency},
              {"signal_gain", g.signal_gain},
              {"popularity_gain", g.popularity_gain},
              {"in_pattern_prob", g.in_pattern_prob},
              {"target_positive_rate", g.target_positive_rate},
              {"label_noise", g.label_noise},
              {"train_size", g.train_size},
              {"test_size", g.test_size},
              {"test_user_fraction", g.test_user_fraction},
              {"profile_fields", std::move(profile)},
              {"seed", g.seed}};
}

GenConfig gen_config_from_json(const json& j) {
  check_keys(j,
             {"n_users", "n_items", "n_categories", "seq_len_min", "seq_len_max", "dt_min",
              "dt_max", "alpha", "backbone_sharpness", "lambda_recency", "signal_gain",
              "popularity_gain", "in_pattern_prob", "target_positive_rate", "label_noise",
              "train_size", "test_size", "test_user_fraction", "profile_fields", "seed"},
             "gen config");
  GenConfig g;
  g.n_users = j.value("n_users", g.n_users);
  g.n_items = j.value("n_items", g.n_items);
  g.n_categories = j.value("n_categories", g.n_categories);
  g.seq_len_min = j.value("seq_len_min", g.seq_len_min);
  g.seq_len_max = j.value("seq_len_max", g.seq_len_max);
  g.dt_min = j.value("dt_min", g.dt_min);
  g.dt_max = j.value("dt_max", g.dt_max);
  g.alpha = j.value("alpha", g.alpha);
  g.backbone_sharpness = j.value("backbone_sharpness", g.backbone_sharpness);
  g.lambda_recency = j.value("lambda_recency", g.lambda_recency);
  g.signal_gain = j.value("signal_gain", g.signal_gain);
  g.popularity_gain = j.value("popularity_gain", g.popularity_gain);
  g.in_pattern_prob = j.value("in_pattern_prob", g.in_pattern_prob);
  g.target_positive_rate = j.value("target_positive_rate", g.target_positive_rate);
  g.label_noise = j.value("label_noise", g.label_noise);
  g.train_size = j.value("train_size", g.train_size);
  g.test_size = j.value("test_size", g.test_size);
  g.test_user_fraction = j.value("test_user_fraction", g.test_user_fraction);
  if (j.contains("profile_fields")) {
    g.profile_fields.clear();
    for (const json& f : j.at("profile_fields")) {
      check_keys(f, {"name", "values"}, "profile field");
      g.profile_fields.emplace_back(f.at("name").get<std::string>(), f.at("values").get<int>());
    }
  }
  g.seed = j.value("seed", g.seed);
  validate_gen_config(g);
  return g;
}

json train_config_to_json(const TrainConfig& t) {
  return json{{"epochs", t.epochs}, {"batch_size", t.batch_size}, {"lr", t.lr},
              {"beta1", t.beta1},   {"beta2", t.beta2},           {"eps", t.eps},
              {"shuffle", t.shuffle}, {"seed", t.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  check_keys(j, {"epochs", "batch_size", "lr", "beta1", "beta2", "eps", "shuffle", "seed"},
             "train config");
  TrainConfig t;
  t.epochs = j.value("epochs", t.epochs);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.lr = j.value("lr", t.lr);
  t.beta1 = j.value("beta1", t.beta1);
  t.beta2 = j.value("beta2", t.beta2);
  t.eps = j.value("eps", t.eps);
  t.shuffle = j.value("shuffle", t.shuffle);
  t.seed = j.value("seed", t.seed);
  validate_train_config(t);
  return t;
}

RunConfig default_run_config() {
  RunConfig run;
  run.model.schema = default_schema_for(run.gen);
  run.model.block.d_model = run.model.schema.d_model();
  run.model.block.heads = 2;
  run.model.block.d_ff = 32;
  run.model.block.dropout_rate = 0.1;
  run.model.block.leaky_slope = 0.01;
  run.model.block.eps = 1e-8;
  run.model.block.blocks = 1;
  run.model.mlp_hidden = {32, 16, 8};
  run.model.kind = ModelKind::kBst;
  return run;
}

RunConfig run_config_from_json(const json& j) {
  check_keys(j, {"gen", "schema", "block", "mlp_hidden", "train", "kind", "seed"}, "run config");
  RunConfig run = default_run_config();
  if (j.contains("gen")) run.gen = gen_config_from_json(j.at("gen"));
  if (j.contains("schema")) {
    run.model.schema = schema_from_json(j.at("schema"));
    run.explicit_schema = true;
  } else {
    run.model.schema = default_schema_for(run.gen);
  }
  if (j.contains("block")) run.model.block = block_from_json(j.at("block"));
  if (run.model.block.d_model == 0) run.model.block.d_model = run.model.schema.d_model();
  if (j.contains("mlp_hidden")) {
    auto hidden = j.at("mlp_hidden").get<std::vector<int>>();
    if (hidden.size() != 3)
      throw std::invalid_argument("run config: mlp_hidden must have exactly 3 widths");
    std::copy(hidden.begin(), hidden.end(), run.model.mlp_hidden.begin());
  }
  if (j.contains("kind")) run.model.kind = model_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("train")) run.train = train_config_from_json(j.at("train"));
  if (j.contains("seed")) {
    std::uint64_t seed = j.at("seed").get<std::uint64_t>();
    if (!j.contains("gen") || !j.at("gen").contains("seed")) run.gen.seed = seed;
    run.model.seed = seed;
    if (!j.contains("train") || !j.at("train").contains("seed")) run.train.seed = seed;
  }
  return run;
}

json run_config_to_json(const RunConfig& run) {
  json j{{"gen", gen_config_to_json(run.gen)},
         {"block", block_to_json(run.model.block)},
         {"mlp_hidden", run.model.mlp_hidden},
         {"kind", to_string(run.model.kind)},
         {"train", train_config_to_json(run.train)},
         {"seed", run.model.seed}};
  j["schema"] = schema_to_json(run.model.schema);
  return j;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& err) {
    throw std::runtime_error(std::string("config ") + path + ": " + err.what());
  }
  return run_config_from_json(j);
}

}  // namespace bst
