#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "sempar/engine.hpp"

namespace sempar {

/// Knobs for one draw. Random with equal seeds gives identical triples.
/// branch_mask pairs (machine name, branch index) disable alternation
/// branches during sampling; filters name reject-predicates from the
/// built-in registry (see filter_names()).
struct SampleConstraints {
  std::uint64_t seed = 0;
  int max_depth = 48;
  std::size_t max_tokens = 48;
  std::set<std::pair<std::string, int>> branch_mask;
  std::vector<std::string> filters;
  int max_retries = 500;
};

struct Sample {
  std::vector<std::string> tokens;
  SemTreePtr exr;
  SemTreePtr top;  // null when the EXR is a bare literal (no TOP form exists)
  DerivPtr derivation;
};

/// Names of the built-in reject filters.
std::vector<std::string> filter_names();

/// Draws one (utterance, EXR, TOP, derivation) tuple from the engine's
/// grammar. Rejected draws (depth/token caps, filters) are retried on the
/// same random stream; an exhausted retry budget throws an Error naming the
/// binding constraint.
Sample sample(const Engine& engine, const SampleConstraints& constraints);

struct GenerateOptions {
  bool strip_order = false;   // drop the leading ORDER constructor from targets
  unsigned workers = 0;       // 0 = hardware concurrency
  bool progress = false;      // report progress on stderr
};

/// Writes n JSONL records {id, src, exr, top, top_decoupled} to sink.
/// Record i draws from an independent stream derived from (seed, i), so
/// output is byte-identical for any worker count. Returns records written.
std::size_t generate_dataset(const Engine& engine, std::size_t n,
                             const SampleConstraints& constraints, std::ostream& sink,
                             const GenerateOptions& options = {});

/// "(ORDER a b)" -> "a b"; text without a leading ORDER is returned as-is.
std::string strip_leading_order(const std::string& linearized);

}  // namespace sempar
