#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sempar {

/// Sibling-ordering transform for rendering or rewriting trees.
/// Random with equal seeds yields identical permutations; SortedLexicographic
/// sorts siblings by their linearized text and is idempotent.
struct OrderingPolicy {
  enum class Kind { Natural, Random, SortedLexicographic };
  Kind kind = Kind::Natural;
  std::uint64_t seed = 0;

  static OrderingPolicy natural() { return {Kind::Natural, 0}; }
  static OrderingPolicy random(std::uint64_t seed) { return {Kind::Random, seed}; }
  static OrderingPolicy sorted() { return {Kind::SortedLexicographic, 0}; }
};

class SemTree;
using SemTreePtr = std::shared_ptr<const SemTree>;

/// One tree type for EXR, TOP and TOP-Decoupled forms.
///
/// A node is either a constructor (uppercase name, ordered non-empty child
/// list), a literal leaf (resolved entity id, integer, or resolved string),
/// or a token leaf (verbatim utterance token). Trees are immutable after
/// construction and safe to share across threads; every operation below is a
/// pure function.
class SemTree {
 public:
  struct Entity {
    std::string id;
    bool operator==(const Entity&) const = default;
  };
  // string alternative = resolved surface text (kept verbatim, quoted when linearized)
  using Literal = std::variant<Entity, std::int64_t, std::string>;

  enum class Kind { Constructor, Literal, Token };

  static SemTreePtr make(std::string name, std::vector<SemTreePtr> children);
  static SemTreePtr entity(std::string id);
  static SemTreePtr integer(std::int64_t value);
  static SemTreePtr resolved_string(std::string text);
  static SemTreePtr token(std::string text);

  Kind kind() const { return kind_; }
  bool is_constructor() const { return kind_ == Kind::Constructor; }
  bool is_literal() const { return kind_ == Kind::Literal; }
  bool is_token() const { return kind_ == Kind::Token; }
  bool is_leaf() const { return kind_ != Kind::Constructor; }

  const std::string& name() const { return name_; }
  const std::vector<SemTreePtr>& children() const { return children_; }
  const Literal& literal() const { return literal_; }
  const std::string& token_text() const { return name_; }

  friend bool operator==(const SemTree& a, const SemTree& b);
  friend bool operator!=(const SemTree& a, const SemTree& b) { return !(a == b); }

 private:
  SemTree() = default;
  Kind kind_ = Kind::Token;
  std::string name_;  // constructor name, or token text
  std::vector<SemTreePtr> children_;
  Literal literal_;
};

/// True iff `name` is a valid constructor symbol: [A-Z][A-Z0-9_]*.
bool is_constructor_name(std::string_view name);

/// A leaf slot is a constructor all of whose children are leaves; it is the
/// resolvable entity position of the notation.
bool is_leaf_slot(const SemTree& node);

/// True iff the tree contains no token leaves anywhere.
bool is_exr(const SemTree& tree);

/// Splits on runs of whitespace; never yields empty tokens. Lowercasing is
/// ASCII-only so multi-byte UTF-8 passes through untouched.
std::vector<std::string> tokenize(std::string_view text, bool lowercase = false);

/// Left-to-right token-leaf texts (for a full TOP tree this reconstructs the
/// source utterance).
std::vector<std::string> leaf_tokens(const SemTree& tree);

/// Parses the parenthesized linearization. Integers become integer literals,
/// uppercase symbols become entity literals, quoted strings become resolved
/// strings, everything else becomes a token leaf. Throws TreeSyntaxError with
/// a character offset on malformed input.
SemTreePtr parse_linearized(std::string_view text);

/// Preorder rendering with single spaces; sibling order transformed per
/// policy (Natural renders storage order). Non-natural policies reject trees
/// containing token leaves, like reorder().
std::string linearize(const SemTreePtr& tree, OrderingPolicy policy = OrderingPolicy::natural());

/// Recursively sorts every child list by its linearized text. Stable and
/// idempotent; accepts any tree (tokens included).
SemTreePtr canonicalize(const SemTreePtr& tree);

/// Equality modulo sibling order: canonicalize both sides and compare.
bool unordered_equal(const SemTreePtr& a, const SemTreePtr& b);

/// Removes every token leaf whose parent is not a leaf slot (TOP ->
/// TOP-Decoupled). Idempotent. Rejects trees with literal leaves under
/// non-slot constructors, which cannot be TOP.
SemTreePtr decouple(const SemTreePtr& top);

/// Permutes children at every node per policy. EXR input only: token order
/// is meaningful in TOP, so trees containing token leaves are rejected.
SemTreePtr reorder(const SemTreePtr& tree, OrderingPolicy policy);

}  // namespace sempar
