#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "sempar/catalog.hpp"
#include "sempar/grammar.hpp"
#include "sempar/semtree.hpp"

namespace sempar {

/// Half-open token range. begin >= end means "no tokens".
struct Span {
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  bool empty() const { return begin >= end; }
};

struct DerivationNode;
using DerivPtr = std::shared_ptr<const DerivationNode>;

/// One choice point in a derivation. Machine nodes mark a definition call
/// (carrying the referencing expression so replay can bind arguments), Alt
/// nodes record the chosen branch and its probability, Catalog nodes record
/// the matched alias span, entity and alias probability. Child spans are
/// contiguous and partition the parent span; the derivation probability is
/// the product of all prob_factors.
struct DerivationNode {
  enum class Kind { Machine, Alt, Seq, Terminal, Catalog, Epsilon, Action };
  Kind kind = Kind::Epsilon;
  std::string name;    // Machine: definition name; Catalog: catalog name
  int branch = -1;     // Alt: chosen branch index
  double prob_factor = 1.0;
  Span span;
  std::vector<DerivPtr> children;
  std::string entity;  // Catalog: matched entity id
  const MachineExpr* expr = nullptr;  // Machine: the Ref site; Action: the action
};

std::size_t derivation_node_count(const DerivationNode& d);

/// Compact structural rendering, e.g. "S[0:4]{1:(a S[1:3]{...} b)}".
/// Used to compare result sets across engine configurations.
std::string derivation_trace(const DerivationNode& d);

/// Semantic values manipulated by actions: integers, strings, nullary
/// constants (entity ids), trees, and lists. Each value remembers the token
/// span it was built from, which is what derivation-to-TOP conversion uses.
struct SemValue {
  struct List;
  using ListPtr = std::shared_ptr<const List>;
  using Data = std::variant<std::int64_t, std::string, SemTree::Entity, SemTreePtr, ListPtr>;
  struct List {
    std::vector<SemValue> items;  // front = head
  };
  Data data;
  Span span;

  bool is_list() const { return std::holds_alternative<ListPtr>(data); }
};

struct ParseItem {
  SemTreePtr exr;
  DerivPtr derivation;
  double prob = 0.0;
  std::size_t node_count = 0;
};

/// Ranked parses: probability descending, ties broken by fewer derivation
/// nodes, then by lexicographic EXR text. An empty item list is the normal
/// no-parse signal.
struct ParseResult {
  std::vector<ParseItem> items;
  bool truncated = false;               // some (machine, start) hit the ambiguity cap
  std::vector<std::string> notes;       // derivations dropped during replay, etc.
};

struct EngineOptions {
  int max_ambiguity = 64;   // live derivations kept per (machine, start)
  bool memoize = true;
  bool check_grammar = true;
};

/// Optional MLE counts: (machine name, branch index) -> count, applied to
/// the outermost alternation of that machine.
using BranchCounts = std::map<std::pair<std::string, int>, double>;

/// Per-alternation branch probabilities, indexed by MachineExpr::alt_id.
/// Counts win over declared weights; otherwise weights are normalized;
/// otherwise branches are uniform. All-zero counts are an error.
std::vector<std::vector<double>> branch_probabilities(const Grammar& grammar,
                                                      const BranchCounts* counts = nullptr);

/// Probabilistic top-down parser with memoization over grammar machines.
///
/// Search enumerates derivations without touching the semantic stack (memo
/// key is just (machine, start index)); actions are replayed afterwards on
/// the completed winners, which keeps memoization sound. The engine itself
/// is immutable after construction, so distinct utterances may be parsed
/// concurrently; each parse call keeps its own memo table.
class Engine {
 public:
  Engine(Grammar grammar, CatalogSet catalogs, EngineOptions options = {},
         const BranchCounts* counts = nullptr);

  const Grammar& grammar() const { return grammar_; }
  const CatalogSet& catalogs() const { return catalogs_; }
  const EngineOptions& options() const { return options_; }
  const std::vector<std::vector<double>>& alt_probs() const { return alt_probs_; }

  /// Full-span parses of the start machine, ranked, at most top_k.
  ParseResult parse(std::span<const std::string> tokens, std::size_t top_k = 10) const;

  struct Replayed {
    SemTreePtr exr;
    std::unordered_map<const SemTree*, Span> spans;  // constructed node -> token span
  };

  /// Replays semantic actions along a derivation over an initially empty
  /// stack. Throws ActionError on pattern-match failure and
  /// StackNotSingletonError if more than one cell remains. An empty final
  /// stack (a pure recognizer) yields the constant NIL.
  Replayed replay(const DerivationNode& derivation,
                  std::span<const std::string> tokens) const;

  /// Builds the full TOP tree for a derivation: same constructor skeleton as
  /// the EXR, each constructor wrapping the token span consumed while its
  /// subtree was built, with carrier tokens attached at the innermost
  /// enclosing constructor. The leaf sequence reproduces the utterance.
  SemTreePtr derivation_to_top(const DerivationNode& derivation,
                               std::span<const std::string> tokens) const;

 private:
  Grammar grammar_;
  CatalogSet catalogs_;
  EngineOptions options_;
  std::vector<std::vector<double>> alt_probs_;
};

}  // namespace sempar
