#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bst/graph.hpp"

namespace bst {

struct BehaviorEvent {
  int item = 0;
  int cat = 0;
  std::int64_t ts = 0;
};

inline bool is_padding(const BehaviorEvent& e) { return e.item == 0 && e.cat == 0 && e.ts == 0; }

struct Example {
  int user_id = 0;
  std::map<std::string, int> other;    // field name -> categorical id
  std::vector<BehaviorEvent> history;  // ascending timestamps
  BehaviorEvent target;                // target.ts is the request time
  int label = 0;
};

struct FieldSpec {
  std::string name;
  int vocab = 0;
  int width = 0;
};

// Cross of two fields, hashed into a fixed table. "item_id"/"category_id"
// refer to the target event; any other name is looked up in Example::other.
struct CrossSpec {
  std::string a;
  std::string b;
  int table_size = 0;
  int width = 0;

  std::string name() const { return a + "*" + b; }
};

struct FeatureSchema {
  int item_vocab = 0;
  int item_width = 0;
  int cat_vocab = 0;
  int cat_width = 0;
  int pos_buckets = 12;
  int pos_width = 0;
  int seq_len = 0;  // n: padded history length (target slot comes on top)
  std::vector<FieldSpec> fields;
  std::vector<CrossSpec> crosses;

  int d_model() const { return item_width + cat_width + pos_width; }
  int d_other() const;
};

void validate_schema(const FeatureSchema& schema);

// Embedding-table shapes implied by the schema, keyed by parameter name
// (emb.item, emb.cat, emb.pos, emb.f.<field>, emb.x.<a>*<b>). Row 0 of every
// table is reserved for padding/unknown ids.
std::map<std::string, std::pair<int, int>> embedding_table_shapes(const FeatureSchema& schema);

// Counts of out-of-vocabulary ids that were remapped to the reserved row 0.
struct OovTally {
  long long sequence = 0;
  long long other = 0;
};

std::int64_t position_delta(std::int64_t t_request, std::int64_t t_click);
int bucketize_position(std::int64_t delta, int buckets);
int hash_cross(std::int64_t a, std::int64_t b, int table_size);

struct PaddedSeq {
  std::vector<BehaviorEvent> events;  // exactly n slots, padding on the left
  SeqMask mask;                       // true on real events
};
PaddedSeq pad_truncate(const std::vector<BehaviorEvent>& history, int n);

// Table row indices for the n padded history slots plus the target slot
// (last). Out-of-vocabulary ids become 0 and bump the tally.
struct SeqSlots {
  std::vector<int> item_ids;
  std::vector<int> cat_ids;
  std::vector<int> pos_ids;
  SeqMask mask;  // target slot always true
};
SeqSlots sequence_slots(const Example& example, const FeatureSchema& schema,
                        OovTally* tally = nullptr);

// E: (n+1) x d_model, one row per slot: item emb ⊕ category emb ⊕ position emb.
Var embed_sequence(Tape& tape, const NamedTensors& params, const SeqSlots& slots,
                   const FeatureSchema& schema);

// History-only variant without the position feature: n x (item+cat widths).
// Used by models that consume the sequence but not the time signal.
Var embed_history_plain(Tape& tape, const NamedTensors& params, const SeqSlots& slots);

// Target item embedding without position: 1 x (item+cat widths).
Var embed_target_plain(Tape& tape, const NamedTensors& params, const SeqSlots& slots);

// 1 x d_other: every schema field's row, then every cross feature's row.
Var embed_other_features(Tape& tape, const NamedTensors& params, const Example& example,
                         const FeatureSchema& schema, OovTally* tally = nullptr);

}  // namespace bst
