#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sempar/semtree.hpp"

namespace sempar {

/// Per-token BIO tags; labels[i] belongs to tokens[i]. Tags are "Other",
/// "B-X" or "I-X".
struct LabeledSequence {
  std::vector<std::string> tokens;
  std::vector<std::string> labels;
};

/// Maps constructor paths (from intent child down to the leaf slot) to flat
/// labels. Depth-1 paths map to themselves; deeper paths must be listed
/// explicitly or conversion reports lossy flattening. Injective on the paths
/// it covers so label sequences convert back to trees.
struct FlattenMap {
  std::set<std::string> intents = {"PIZZAORDER", "DRINKORDER"};
  std::string root = "ORDER";
  // path joined with '/' (e.g. "NOT/TOPPING") -> flat label
  std::map<std::string, std::string> paths = {
      {"NOT/TOPPING", "NEG_TOPPING"},
      {"NOT/STYLE", "NEG_STYLE"},
      {"COMPLEX_TOPPING/QUANTITY", "COMPLEX_TOPPING_QUANTITY"},
      {"COMPLEX_TOPPING/TOPPING", "COMPLEX_TOPPING_TOPPING"},
  };

  static FlattenMap defaults() { return {}; }
  static FlattenMap load(const std::string& path);  // JSON {intents, root, paths}

  /// Flat label for a slot path, or empty when the path is not expressible.
  std::string label_for(const std::vector<std::string>& path) const;
  /// Inverse: constructor path for a flat label (depth-1 labels map to
  /// themselves). Empty when unknown -- only mapped labels invert.
  std::vector<std::string> path_for(const std::string& label) const;
};

struct IntentSpan {
  std::string intent;
  std::size_t begin = 0;  // token indices into the full utterance
  std::size_t end = 0;
};

/// BIO tags over the full utterance: tokens inside an intent subtree get
/// B-/I- of that intent, the rest Other. Nested intents are an error.
LabeledSequence top_to_intent_labels(const SemTreePtr& top,
                                     const FlattenMap& fm = FlattenMap::defaults());

/// The intent spans of a TOP tree, in utterance order.
std::vector<IntentSpan> intent_spans(const SemTreePtr& top,
                                     const FlattenMap& fm = FlattenMap::defaults());

/// BIO tags over one intent span: tokens under a leaf slot get the flattened
/// label of the slot's constructor path, the rest Other. Paths outside the
/// map's coverage throw (lossy flattening).
LabeledSequence top_to_ner_labels(const SemTreePtr& top, const IntentSpan& span,
                                  const FlattenMap& fm = FlattenMap::defaults());

/// Single left-to-right pass converting every I-X whose repaired predecessor
/// is not B-X/I-X into Other. Output is well-formed BIO; idempotent.
LabeledSequence repair(const LabeledSequence& seq);

/// Rebuilds a TOP tree from intent labels plus one NER sequence per intent
/// span (in order). Inverse of the two encoders on expressible trees.
SemTreePtr labels_to_top(const std::vector<std::string>& tokens, const LabeledSequence& is_labels,
                         const std::vector<LabeledSequence>& ner_per_span,
                         const FlattenMap& fm = FlattenMap::defaults());

/// CoNLL-style two-column export: token TAB label, blank line between
/// sequences.
void write_conll(std::ostream& out, const LabeledSequence& seq);
std::vector<LabeledSequence> read_conll(std::istream& in);

}  // namespace sempar
