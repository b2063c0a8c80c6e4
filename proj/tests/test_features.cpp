#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "bst/features.hpp"
#include "bst/rng.hpp"

using namespace bst;

namespace {

FeatureSchema small_schema() {
  FeatureSchema s;
  s.item_vocab = 20;
  s.item_width = 4;
  s.cat_vocab = 6;
  s.cat_width = 2;
  s.pos_buckets = 8;
  s.pos_width = 2;
  s.seq_len = 5;
  s.fields = {{"gender", 3, 2}, {"age", 8, 2}};
  s.crosses = {{"age", "item_id", 50, 2}};
  return s;
}

Example small_example() {
  Example e;
  e.user_id = 7;
  e.other = {{"gender", 1}, {"age", 3}};
  e.history = {{4, 2, 100}, {5, 3, 160}, {11, 2, 220}};
  e.target = {9, 4, 300};
  e.label = 1;
  return e;
}

NamedTensors random_tables(const FeatureSchema& s, std::uint64_t seed) {
  NamedTensors tables;
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (const auto& [name, shape] : embedding_table_shapes(s)) {
    Tensor t(shape.first, shape.second);
    for (double& v : t.data) v = u(rng);
    tables.emplace(name, std::move(t));
  }
  return tables;
}

}  // namespace

TEST_CASE("position_delta substitutes request minus click time") {
  CHECK(position_delta(100, 100) == 0);
  CHECK(position_delta(1000, 400) == 600);
  CHECK(position_delta(5, 0) == 5);
  CHECK_THROWS_AS(position_delta(10, 11), std::invalid_argument);
}

TEST_CASE("bucketize_position follows floor(log2(delta+1)) with clamping") {
  CHECK(bucketize_position(0, 12) == 0);
  CHECK(bucketize_position(1, 12) == 1);
  CHECK(bucketize_position(600, 12) == 9);
  CHECK(bucketize_position(1 << 20, 12) == 11);  // clamped to B-1
  CHECK_THROWS_AS(bucketize_position(-1, 12), std::invalid_argument);
  CHECK_THROWS_AS(bucketize_position(0, 1), std::invalid_argument);
}

TEST_CASE("position buckets are monotone non-decreasing in delta") {
  int prev = 0;
  for (std::int64_t d = 0; d <= 5000; ++d) {
    int b = bucketize_position(d, 12);
    CHECK(b >= prev);
    prev = b;
  }
}

TEST_CASE("hash_cross is deterministic, order-sensitive, never 0") {
  CHECK(hash_cross(3, 7, 1000) == hash_cross(3, 7, 1000));
  CHECK_THROWS_AS(hash_cross(1, 2, 1), std::invalid_argument);

  int differs = 0;
  for (int i = 0; i < 100; ++i) {
    int a = 13 * i + 1, b = 7 * i + 2;
    int ab = hash_cross(a, b, 1000);
    int ba = hash_cross(b, a, 1000);
    CHECK(ab >= 1);
    CHECK(ab < 1000);
    if (ab != ba) ++differs;
  }
  CHECK(differs >= 95);  // order matters almost always; equal ids only by chance
}

TEST_CASE("hash_cross collision count sits within 3 sigma of the birthday bound") {
  // m distinct pairs into T=999 usable slots: pairwise-collision count C has
  // E[C] = C(m,2)/T and Var ~= E[C] for m << T^2.
  const int m = 10000, table = 1000, slots = table - 1;
  Rng rng = make_rng(2024);
  std::uniform_int_distribution<int> u(0, 1 << 30);
  std::set<std::pair<int, int>> pairs;
  while (static_cast<int>(pairs.size()) < m) pairs.emplace(u(rng), u(rng));

  std::vector<int> bucket_count(table, 0);
  for (const auto& [a, b] : pairs) ++bucket_count[hash_cross(a, b, table)];
  CHECK(bucket_count[0] == 0);  // reserved id never produced

  double collisions = 0;
  for (int c : bucket_count) collisions += 0.5 * c * (c - 1);
  double expected = 0.5 * m * (m - 1) / slots;
  double sigma = std::sqrt(expected);
  CHECK(std::abs(collisions - expected) <= 3 * sigma);
}

TEST_CASE("pad_truncate pads on the left and keeps the most recent events") {
  std::vector<BehaviorEvent> three = {{1, 1, 10}, {2, 1, 20}, {3, 2, 30}};
  PaddedSeq p = pad_truncate(three, 5);
  CHECK(p.mask == SeqMask{0, 0, 1, 1, 1});
  CHECK(p.events[2].item == 1);
  CHECK(p.events[4].item == 3);
  CHECK(is_padding(p.events[0]));

  std::vector<BehaviorEvent> seven;
  for (int i = 1; i <= 7; ++i) seven.push_back({i, 1, 10 * i});
  PaddedSeq q = pad_truncate(seven, 5);
  CHECK(q.mask == SeqMask{1, 1, 1, 1, 1});
  CHECK(q.events[0].item == 3);  // oldest two dropped
  CHECK(q.events[4].item == 7);

  PaddedSeq r = pad_truncate(three, 3);
  CHECK(r.events[0].item == 1);
  CHECK(r.mask == SeqMask{1, 1, 1});

  PaddedSeq empty = pad_truncate({}, 4);
  CHECK(empty.mask == SeqMask{0, 0, 0, 0});
}

TEST_CASE("pad_truncate is idempotent on its own output") {
  std::vector<BehaviorEvent> two = {{4, 2, 50}, {6, 3, 80}};
  PaddedSeq once = pad_truncate(two, 5);
  PaddedSeq twice = pad_truncate(once.events, 5);
  CHECK(twice.mask == once.mask);
  for (int i = 0; i < 5; ++i) {
    CHECK(twice.events[i].item == once.events[i].item);
    CHECK(twice.events[i].cat == once.events[i].cat);
    CHECK(twice.events[i].ts == once.events[i].ts);
  }
}

TEST_CASE("sequence_slots appends the target with delta 0 and maps OOV to row 0") {
  FeatureSchema s = small_schema();
  Example e = small_example();
  OovTally tally;
  SeqSlots slots = sequence_slots(e, s, &tally);
  CHECK(slots.item_ids.size() == 6);
  CHECK(slots.mask == SeqMask{0, 0, 1, 1, 1, 1});
  CHECK(slots.item_ids[0] == 0);  // padding
  CHECK(slots.pos_ids[0] == 0);
  CHECK(slots.item_ids[5] == 9);  // target
  CHECK(slots.pos_ids[5] == 0);   // delta 0
  CHECK(slots.pos_ids[2] == bucketize_position(200, 8));
  CHECK(tally.sequence == 0);

  e.history[1].item = 99;  // outside vocab 20
  SeqSlots oov = sequence_slots(e, s, &tally);
  CHECK(oov.item_ids[3] == 0);
  CHECK(oov.mask[3] == 1);  // still a real event
  CHECK(tally.sequence == 1);
}

TEST_CASE("embed_sequence builds (n+1) x d_model with reserved padding rows") {
  FeatureSchema s = small_schema();
  NamedTensors tables = random_tables(s, 3);
  Example e = small_example();
  SeqSlots slots = sequence_slots(e, s);
  Tape tape;
  Var em = embed_sequence(tape, tables, slots, s);
  CHECK(em.rows() == 6);
  CHECK(em.cols() == s.d_model());

  // padding rows are exactly the row-0 concatenation
  const Tensor& item = tables.at("emb.item");
  const Tensor& cat = tables.at("emb.cat");
  const Tensor& pos = tables.at("emb.pos");
  const Tensor& E = em.value();
  for (int j = 0; j < s.item_width; ++j) CHECK(E.at(0, j) == item.at(0, j));
  for (int j = 0; j < s.cat_width; ++j) CHECK(E.at(0, s.item_width + j) == cat.at(0, j));
  for (int j = 0; j < s.pos_width; ++j)
    CHECK(E.at(0, s.item_width + s.cat_width + j) == pos.at(0, j));

  // identical (item, cat, bucket) -> identical rows
  Example twin = e;
  twin.history = {{4, 2, 100}, {4, 2, 100}, {11, 2, 220}};
  SeqSlots tw = sequence_slots(twin, s);
  Tensor T = embed_sequence(tape, tables, tw, s).value();
  for (int j = 0; j < s.d_model(); ++j) CHECK(T.at(2, j) == T.at(3, j));
}

TEST_CASE("embed_other_features concatenates fields then crosses") {
  FeatureSchema s = small_schema();
  NamedTensors tables = random_tables(s, 4);
  Example e = small_example();
  Tape tape;
  Var other = embed_other_features(tape, tables, e, s);
  CHECK(other.rows() == 1);
  CHECK(other.cols() == s.d_other());

  // changing only gender changes only the gender slice
  Example f = e;
  f.other["gender"] = 2;
  Tensor a = other.value();
  Tensor b = embed_other_features(tape, tables, f, s).value();
  bool gender_changed = false;
  for (int j = 0; j < 2; ++j) gender_changed |= a.data[j] != b.data[j];
  CHECK(gender_changed);
  for (int j = 2; j < s.d_other(); ++j) CHECK(a.data[j] == b.data[j]);

  Example missing = e;
  missing.other.erase("age");
  CHECK_THROWS_WITH_AS(embed_other_features(tape, tables, missing, s),
                       "example missing field age", std::invalid_argument);
}

TEST_CASE("other-feature OOV ids fall back to row 0 and are tallied") {
  FeatureSchema s = small_schema();
  NamedTensors tables = random_tables(s, 5);
  Example e = small_example();
  e.other["age"] = 200;  // outside vocab 8
  OovTally tally;
  Tape tape;
  Tensor got = embed_other_features(tape, tables, e, s, &tally).value();
  CHECK(tally.other == 1);
  const Tensor& age = tables.at("emb.f.age");
  CHECK(got.data[2] == age.at(0, 0));
  CHECK(got.data[3] == age.at(0, 1));
}

TEST_CASE("schema validation rejects bad shapes") {
  FeatureSchema s = small_schema();
  CHECK_NOTHROW(validate_schema(s));
  s.pos_buckets = 1;
  CHECK_THROWS_AS(validate_schema(s), std::invalid_argument);
  s = small_schema();
  s.fields[0].vocab = 1;
  CHECK_THROWS_AS(validate_schema(s), std::invalid_argument);
  s = small_schema();
  s.item_width = 0;
  CHECK_THROWS_AS(validate_schema(s), std::invalid_argument);
}
