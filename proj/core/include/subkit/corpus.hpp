#pragma once

#include <string>
#include <utility>
#include <vector>

#include "subkit/group.hpp"

namespace subkit {

/// One corpus group: the parsed JSON description plus derived data.
struct CorpusEntry {
  std::string name;
  std::string source_path;
  GroupPtr group;
  std::vector<std::pair<std::string, Subgroup>> named_subgroups; // label-sorted
  std::vector<int> primes; // prime divisors of |G|
};

/// Loads group files (or directories of *.json) in deterministic
/// path-sorted order. Malformed input raises parse_error naming the file
/// and the offending field.
std::vector<CorpusEntry> load_corpus(const std::vector<std::string>& paths,
                                     const Budget& budget = Budget::from_env());

} // namespace subkit
