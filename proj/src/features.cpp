#include "bst/features.hpp"

#include <bit>
#include <stdexcept>

#include "bst/rng.hpp"

namespace bst {

int FeatureSchema::d_other() const {
  int w = 0;
  for (const FieldSpec& f : fields) w += f.width;
  for (const CrossSpec& c : crosses) w += c.width;
  return w;
}

void validate_schema(const FeatureSchema& schema) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("schema: " + what);
  };
  need(schema.item_vocab >= 2, "item_vocab must be >= 2");
  need(schema.cat_vocab >= 2, "cat_vocab must be >= 2");
  need(schema.item_width > 0 && schema.cat_width > 0 && schema.pos_width > 0,
       "embedding widths must be positive");
  need(schema.pos_buckets >= 2, "pos_buckets must be >= 2");
  need(schema.seq_len >= 1, "seq_len must be >= 1");
  for (const FieldSpec& f : schema.fields) {
    need(!f.name.empty(), "field with empty name");
    need(f.vocab >= 2, "field " + f.name + ": vocab must be >= 2");
    need(f.width > 0, "field " + f.name + ": width must be positive");
  }
  for (const CrossSpec& c : schema.crosses) {
    need(c.table_size >= 2, "cross " + c.name() + ": table_size must be >= 2");
    need(c.width > 0, "cross " + c.name() + ": width must be positive");
  }
}

std::map<std::string, std::pair<int, int>> embedding_table_shapes(const FeatureSchema& schema) {
  std::map<std::string, std::pair<int, int>> shapes;
  shapes["emb.item"] = {schema.item_vocab, schema.item_width};
  shapes["emb.cat"] = {schema.cat_vocab, schema.cat_width};
  shapes["emb.pos"] = {schema.pos_buckets, schema.pos_width};
  for (const FieldSpec& f : schema.fields) shapes["emb.f." + f.name] = {f.vocab, f.width};
  for (const CrossSpec& c : schema.crosses) shapes["emb.x." + c.name()] = {c.table_size, c.width};
  return shapes;
}

std::int64_t position_delta(std::int64_t t_request, std::int64_t t_click) {
  if (t_click > t_request)
    throw std::invalid_argument("position_delta: click at " + std::to_string(t_click) +
                                " is after request at " + std::to_string(t_request));
  return t_request - t_click;
}

int bucketize_position(std::int64_t delta, int buckets) {
  if (delta < 0) throw std::invalid_argument("bucketize_position: negative delta");
  if (buckets < 2) throw std::invalid_argument("bucketize_position: need >= 2 buckets");
  // floor(log2(delta+1)) == bit_width(delta+1) - 1
  int b = std::bit_width(static_cast<std::uint64_t>(delta) + 1) - 1;
  return b >= buckets ? buckets - 1 : b;
}

int hash_cross(std::int64_t a, std::int64_t b, int table_size) {
  if (table_size < 2) throw std::invalid_argument("hash_cross: table_size must be >= 2");
  std::uint64_t h = derive_seed(static_cast<std::uint64_t>(a), {static_cast<std::uint64_t>(b)});
  return 1 + static_cast<int>(h % static_cast<std::uint64_t>(table_size - 1));
}

PaddedSeq pad_truncate(const std::vector<BehaviorEvent>& history, int n) {
  if (n < 1) throw std::invalid_argument("pad_truncate: n must be >= 1");
  PaddedSeq out;
  out.events.assign(n, BehaviorEvent{});
  out.mask.assign(n, 0);
  int take = std::min(n, static_cast<int>(history.size()));
  // keep the `take` most recent events, right-aligned
  for (int i = 0; i < take; ++i) {
    const BehaviorEvent& e = history[history.size() - take + i];
    int slot = n - take + i;
    out.events[slot] = e;
    out.mask[slot] = is_padding(e) ? 0 : 1;
  }
  return out;
}

namespace {

int clamp_id(int id, int vocab, long long& oov) {
  if (id >= 1 && id < vocab) return id;
  ++oov;
  return 0;
}

}  // namespace

SeqSlots sequence_slots(const Example& example, const FeatureSchema& schema, OovTally* tally) {
  OovTally scratch;
  OovTally& t = tally ? *tally : scratch;
  PaddedSeq padded = pad_truncate(example.history, schema.seq_len);

  SeqSlots slots;
  int n = schema.seq_len;
  slots.item_ids.assign(n + 1, 0);
  slots.cat_ids.assign(n + 1, 0);
  slots.pos_ids.assign(n + 1, 0);
  slots.mask.assign(n + 1, 0);

  for (int i = 0; i < n; ++i) {
    if (!padded.mask[i]) continue;  // padding rows stay at the reserved 0s
    const BehaviorEvent& e = padded.events[i];
    slots.item_ids[i] = clamp_id(e.item, schema.item_vocab, t.sequence);
    slots.cat_ids[i] = clamp_id(e.cat, schema.cat_vocab, t.sequence);
    slots.pos_ids[i] =
        bucketize_position(position_delta(example.target.ts, e.ts), schema.pos_buckets);
    slots.mask[i] = 1;
  }
  slots.item_ids[n] = clamp_id(example.target.item, schema.item_vocab, t.sequence);
  slots.cat_ids[n] = clamp_id(example.target.cat, schema.cat_vocab, t.sequence);
  slots.pos_ids[n] = bucketize_position(0, schema.pos_buckets);
  slots.mask[n] = 1;
  return slots;
}

Var embed_sequence(Tape& tape, const NamedTensors& params, const SeqSlots& slots,
                   const FeatureSchema& schema) {
  (void)schema;
  Var items = embed_rows(tape.param("emb.item", params.at("emb.item")), slots.item_ids);
  Var cats = embed_rows(tape.param("emb.cat", params.at("emb.cat")), slots.cat_ids);
  Var pos = embed_rows(tape.param("emb.pos", params.at("emb.pos")), slots.pos_ids);
  return concat_cols({items, cats, pos});
}

Var embed_history_plain(Tape& tape, const NamedTensors& params, const SeqSlots& slots) {
  int n = static_cast<int>(slots.item_ids.size()) - 1;
  std::vector<int> items(slots.item_ids.begin(), slots.item_ids.begin() + n);
  std::vector<int> cats(slots.cat_ids.begin(), slots.cat_ids.begin() + n);
  Var ie = embed_rows(tape.param("emb.item", params.at("emb.item")), items);
  Var ce = embed_rows(tape.param("emb.cat", params.at("emb.cat")), cats);
  return concat_cols({ie, ce});
}

Var embed_target_plain(Tape& tape, const NamedTensors& params, const SeqSlots& slots) {
  int n = static_cast<int>(slots.item_ids.size()) - 1;
  Var ie = embed_rows(tape.param("emb.item", params.at("emb.item")), {slots.item_ids[n]});
  Var ce = embed_rows(tape.param("emb.cat", params.at("emb.cat")), {slots.cat_ids[n]});
  return concat_cols({ie, ce});
}

namespace {

int cross_input_value(const Example& example, const std::string& name) {
  if (name == "item_id") return example.target.item;
  if (name == "category_id") return example.target.cat;
  auto it = example.other.find(name);
  if (it == example.other.end())
    throw std::invalid_argument("example missing field " + name + " used by a cross feature");
  return it->second;
}

}  // namespace

Var embed_other_features(Tape& tape, const NamedTensors& params, const Example& example,
                         const FeatureSchema& schema, OovTally* tally) {
  OovTally scratch;
  OovTally& t = tally ? *tally : scratch;
  std::vector<Var> parts;
  parts.reserve(schema.fields.size() + schema.crosses.size());
  for (const FieldSpec& f : schema.fields) {
    auto it = example.other.find(f.name);
    if (it == example.other.end())
      throw std::invalid_argument("example missing field " + f.name);
    int id = clamp_id(it->second, f.vocab, t.other);
    parts.push_back(embed_rows(tape.param("emb.f." + f.name, params.at("emb.f." + f.name)), {id}));
  }
  for (const CrossSpec& c : schema.crosses) {
    int id = hash_cross(cross_input_value(example, c.a), cross_input_value(example, c.b),
                        c.table_size);
    std::string key = "emb.x." + c.name();
    parts.push_back(embed_rows(tape.param(key, params.at(key)), {id}));
  }
  if (parts.empty())
    throw std::invalid_argument("schema has no other-feature fields or crosses");
  return concat_cols(parts);
}

}  // namespace bst
