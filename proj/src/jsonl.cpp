#include "bst/jsonl.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace bst {

namespace {

using nlohmann::json;

json event_to_json(const BehaviorEvent& e) {
  return json{{"item", e.item}, {"cat", e.cat}, {"ts", e.ts}};
}

BehaviorEvent event_from_json(const json& j, const std::string& where) {
  for (const char* key : {"item", "cat", "ts"})
    if (!j.contains(key) || !j.at(key).is_number_integer())
      throw std::runtime_error(where + ": missing or non-integer field " + key);
  return BehaviorEvent{j.at("item").get<int>(), j.at("cat").get<int>(),
                       j.at("ts").get<std::int64_t>()};
}

}  // namespace

void write_jsonl(const std::vector<Example>& examples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const Example& e : examples) {
    json hist = json::array();
    for (const BehaviorEvent& ev : e.history) hist.push_back(event_to_json(ev));
    json record{{"user_id", e.user_id},
                {"other", e.other},
                {"history", std::move(hist)},
                {"target", event_to_json(e.target)},
                {"label", e.label}};
    out << record.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

std::vector<Example> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Example> examples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::string where = path + " line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& err) {
      throw std::runtime_error(where + ": " + err.what());
    }
    Example e;
    if (!j.contains("user_id") || !j.at("user_id").is_number_integer())
      throw std::runtime_error(where + ": missing or non-integer field user_id");
    e.user_id = j.at("user_id").get<int>();
    if (!j.contains("other") || !j.at("other").is_object())
      throw std::runtime_error(where + ": missing or non-object field other");
    for (const auto& [key, value] : j.at("other").items()) {
      if (!value.is_number_integer())
        throw std::runtime_error(where + ": other." + key + " is not an integer");
      e.other[key] = value.get<int>();
    }
    if (!j.contains("history") || !j.at("history").is_array())
      throw std::runtime_error(where + ": missing or non-array field history");
    for (const json& ev : j.at("history"))
      e.history.push_back(event_from_json(ev, where + " history"));
    if (!j.contains("target"))
      throw std::runtime_error(where + ": missing field target");
    e.target = event_from_json(j.at("target"), where + " target");
    if (!j.contains("label") || !j.at("label").is_number_integer())
      throw std::runtime_error(where + ": missing or non-integer field label");
    e.label = j.at("label").get<int>();
    if (e.label != 0 && e.label != 1)
      throw std::runtime_error(where + ": label must be 0 or 1");
    for (size_t i = 0; i < e.history.size(); ++i) {
      if (i > 0 && e.history[i].ts < e.history[i - 1].ts)
        throw std::runtime_error(where + ": history timestamps not ascending");
      if (e.history[i].ts > e.target.ts)
        throw std::runtime_error(where + ": history timestamp after request time");
    }
    examples.push_back(std::move(e));
  }
  return examples;
}

}  // namespace bst
