#pragma once

#include <string>
#include <vector>

#include "bst/features.hpp"

namespace bst {

// One JSON object per line: user_id, other (string->int), history (ascending
// ts), target, label. Errors carry the path and 1-based line number.
void write_jsonl(const std::vector<Example>& examples, const std::string& path);
std::vector<Example> read_jsonl(const std::string& path);

}  // namespace bst
