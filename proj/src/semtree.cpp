#include "sempar/semtree.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "sempar/errors.hpp"
#include "sempar/rng.hpp"

namespace sempar {

bool is_constructor_name(std::string_view name) {
  if (name.empty() || name[0] < 'A' || name[0] > 'Z') return false;
  for (char c : name) {
    if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_')) return false;
  }
  return true;
}

namespace {

bool is_integer_text(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = s[0] == '-' ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

// Entity symbols: uppercase letters, digits, underscores, at least one letter.
// Covers ids like PEPPERS as well as 2_LITER-style values.
bool is_entity_text(std::string_view s) {
  bool has_letter = false;
  if (s.empty()) return false;
  for (char c : s) {
    if (c >= 'A' && c <= 'Z')
      has_letter = true;
    else if (!((c >= '0' && c <= '9') || c == '_'))
      return false;
  }
  return has_letter;
}

}  // namespace

SemTreePtr SemTree::make(std::string name, std::vector<SemTreePtr> children) {
  if (!is_constructor_name(name)) throw Error("invalid constructor name: '" + name + "'");
  if (children.empty()) throw Error("constructor " + name + " must have at least one child");
  auto node = std::shared_ptr<SemTree>(new SemTree());
  node->kind_ = Kind::Constructor;
  node->name_ = std::move(name);
  node->children_ = std::move(children);
  return node;
}

SemTreePtr SemTree::entity(std::string id) {
  auto node = std::shared_ptr<SemTree>(new SemTree());
  node->kind_ = Kind::Literal;
  node->literal_ = Entity{std::move(id)};
  return node;
}

SemTreePtr SemTree::integer(std::int64_t value) {
  auto node = std::shared_ptr<SemTree>(new SemTree());
  node->kind_ = Kind::Literal;
  node->literal_ = value;
  return node;
}

SemTreePtr SemTree::resolved_string(std::string text) {
  auto node = std::shared_ptr<SemTree>(new SemTree());
  node->kind_ = Kind::Literal;
  node->literal_ = std::move(text);
  return node;
}

SemTreePtr SemTree::token(std::string text) {
  auto node = std::shared_ptr<SemTree>(new SemTree());
  node->kind_ = Kind::Token;
  node->name_ = std::move(text);
  return node;
}

bool operator==(const SemTree& a, const SemTree& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case SemTree::Kind::Token:
      return a.name_ == b.name_;
    case SemTree::Kind::Literal:
      return a.literal_ == b.literal_;
    case SemTree::Kind::Constructor: {
      if (a.name_ != b.name_ || a.children_.size() != b.children_.size()) return false;
      for (std::size_t i = 0; i < a.children_.size(); ++i)
        if (!(*a.children_[i] == *b.children_[i])) return false;
      return true;
    }
  }
  return false;
}

bool is_leaf_slot(const SemTree& node) {
  if (!node.is_constructor()) return false;
  for (const auto& c : node.children())
    if (c->is_constructor()) return false;
  return true;
}

bool is_exr(const SemTree& tree) {
  if (tree.is_token()) return false;
  for (const auto& c : tree.children())
    if (!is_exr(*c)) return false;
  return true;
}

std::vector<std::string> tokenize(std::string_view text, bool lowercase) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) {
      std::string tok(text.substr(start, i - start));
      if (lowercase) {
        for (char& c : tok)
          if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
      out.push_back(std::move(tok));
    }
  }
  return out;
}

namespace {

void collect_leaf_tokens(const SemTree& node, std::vector<std::string>& out) {
  if (node.is_token()) {
    out.push_back(node.token_text());
    return;
  }
  for (const auto& c : node.children()) collect_leaf_tokens(*c, out);
}

}  // namespace

std::vector<std::string> leaf_tokens(const SemTree& tree) {
  std::vector<std::string> out;
  collect_leaf_tokens(tree, out);
  return out;
}

// ---------------------------------------------------------------------------
// Linearized text format

namespace {

struct TreeReader {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }

  SemTreePtr parse_node() {
    skip_ws();
    if (pos >= text.size() || text[pos] != '(')
      throw TreeSyntaxError("expected '('", pos);
    std::size_t open = pos;
    ++pos;
    skip_ws();
    std::string name = read_word();
    if (name.empty()) throw TreeSyntaxError("empty constructor", open);
    if (!is_constructor_name(name))
      throw TreeSyntaxError("invalid constructor name '" + name + "'", open + 1);
    std::vector<SemTreePtr> children;
    for (;;) {
      skip_ws();
      if (pos >= text.size()) throw TreeSyntaxError("unbalanced parentheses", pos);
      if (text[pos] == ')') {
        ++pos;
        break;
      }
      if (text[pos] == '(') {
        children.push_back(parse_node());
      } else if (text[pos] == '"') {
        children.push_back(SemTree::resolved_string(read_quoted()));
      } else {
        std::string word = read_word();
        if (word.empty()) throw TreeSyntaxError("unexpected character", pos);
        children.push_back(classify_leaf(word));
      }
    }
    if (children.empty()) throw TreeSyntaxError("constructor " + name + " has no children", open);
    return SemTree::make(std::move(name), std::move(children));
  }

  static SemTreePtr classify_leaf(const std::string& word) {
    if (is_integer_text(word)) {
      std::int64_t v = 0;
      std::from_chars(word.data(), word.data() + word.size(), v);
      return SemTree::integer(v);
    }
    if (is_entity_text(word)) return SemTree::entity(word);
    return SemTree::token(word);
  }

  std::string read_word() {
    std::size_t start = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (c == '(' || c == ')' || c == '"' || std::isspace(static_cast<unsigned char>(c))) break;
      ++pos;
    }
    return std::string(text.substr(start, pos - start));
  }

  std::string read_quoted() {
    std::size_t open = pos;
    ++pos;  // opening quote
    std::string out;
    while (pos < text.size() && text[pos] != '"') {
      if (text[pos] == '\\' && pos + 1 < text.size()) ++pos;
      out.push_back(text[pos]);
      ++pos;
    }
    if (pos >= text.size()) throw TreeSyntaxError("unterminated string", open);
    ++pos;  // closing quote
    return out;
  }
};

void render(const SemTree& node, std::string& out) {
  switch (node.kind()) {
    case SemTree::Kind::Token:
      out += node.token_text();
      return;
    case SemTree::Kind::Literal: {
      const auto& lit = node.literal();
      if (std::holds_alternative<SemTree::Entity>(lit)) {
        out += std::get<SemTree::Entity>(lit).id;
      } else if (std::holds_alternative<std::int64_t>(lit)) {
        out += std::to_string(std::get<std::int64_t>(lit));
      } else {
        out += '"';
        for (char c : std::get<std::string>(lit)) {
          if (c == '"' || c == '\\') out += '\\';
          out += c;
        }
        out += '"';
      }
      return;
    }
    case SemTree::Kind::Constructor: {
      out += '(';
      out += node.name();
      for (const auto& c : node.children()) {
        out += ' ';
        render(*c, out);
      }
      out += ')';
      return;
    }
  }
}

}  // namespace

SemTreePtr parse_linearized(std::string_view text) {
  TreeReader reader{text};
  if (reader.at_end()) throw TreeSyntaxError("empty input", 0);
  SemTreePtr tree = reader.parse_node();
  if (!reader.at_end()) throw TreeSyntaxError("trailing garbage after tree", reader.pos);
  return tree;
}

std::string linearize(const SemTreePtr& tree, OrderingPolicy policy) {
  const SemTreePtr& t =
      policy.kind == OrderingPolicy::Kind::Natural ? tree : reorder(tree, policy);
  std::string out;
  render(*t, out);
  return out;
}

SemTreePtr canonicalize(const SemTreePtr& tree) {
  if (!tree->is_constructor()) return tree;
  std::vector<SemTreePtr> kids;
  kids.reserve(tree->children().size());
  for (const auto& c : tree->children()) kids.push_back(canonicalize(c));
  std::vector<std::pair<std::string, SemTreePtr>> keyed;
  keyed.reserve(kids.size());
  for (auto& k : kids) keyed.emplace_back(linearize(k), k);
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  kids.clear();
  for (auto& [key, k] : keyed) kids.push_back(std::move(k));
  return SemTree::make(tree->name(), std::move(kids));
}

bool unordered_equal(const SemTreePtr& a, const SemTreePtr& b) {
  return *canonicalize(a) == *canonicalize(b);
}

namespace {

SemTreePtr decouple_node(const SemTreePtr& node) {
  if (!node->is_constructor()) return node;
  if (is_leaf_slot(*node)) return node;
  std::vector<SemTreePtr> kids;
  for (const auto& c : node->children()) {
    if (c->is_token()) continue;  // carrier token outside any leaf slot
    if (c->is_literal())
      throw Error("not a TOP tree: literal leaf under non-slot constructor " + node->name());
    kids.push_back(decouple_node(c));
  }
  return SemTree::make(node->name(), std::move(kids));
}

}  // namespace

SemTreePtr decouple(const SemTreePtr& top) {
  if (!top->is_constructor()) throw Error("decouple: input is not a constructor tree");
  return decouple_node(top);
}

namespace {

SemTreePtr reorder_node(const SemTreePtr& node, OrderingPolicy policy, Rng& rng) {
  if (node->is_token()) throw Error("reorder: input contains utterance tokens (TOP, not EXR)");
  if (!node->is_constructor()) return node;
  std::vector<SemTreePtr> kids;
  kids.reserve(node->children().size());
  for (const auto& c : node->children()) kids.push_back(reorder_node(c, policy, rng));
  switch (policy.kind) {
    case OrderingPolicy::Kind::Natural:
      break;
    case OrderingPolicy::Kind::Random:
      // Fisher-Yates with our own generator so the permutation is portable.
      for (std::size_t i = kids.size(); i > 1; --i)
        std::swap(kids[i - 1], kids[rng.below(i)]);
      break;
    case OrderingPolicy::Kind::SortedLexicographic: {
      std::vector<std::pair<std::string, SemTreePtr>> keyed;
      keyed.reserve(kids.size());
      for (auto& k : kids) keyed.emplace_back(linearize(k), k);
      std::stable_sort(keyed.begin(), keyed.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      kids.clear();
      for (auto& [key, k] : keyed) kids.push_back(std::move(k));
      break;
    }
  }
  return SemTree::make(node->name(), std::move(kids));
}

}  // namespace

SemTreePtr reorder(const SemTreePtr& tree, OrderingPolicy policy) {
  Rng rng(policy.seed);
  return reorder_node(tree, policy, rng);
}

}  // namespace sempar
