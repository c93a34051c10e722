#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sempar {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

// ---------------------------------------------------------------------------
// Action expressions and patterns
//
// Semantic actions are functions from the semantic stack to a new stack. A
// clause `fun p1, ..., pn => e` matches p1..p(n-1) against the top n-1 cells
// and pn against the remainder of the stack (the stack is a list growing on
// its left end), then evaluates e to the new stack. So `fun S => t::S`
// pushes t and `fun n::S => n+1::S` increments the top cell.

struct ActionExpr;
using ActionExprPtr = std::shared_ptr<const ActionExpr>;

struct ActionExpr {
  enum class Kind {
    Var,        // lowercase identifier
    Int,        // integer literal
    Str,        // double-quoted string
    Const,      // uppercase identifier with no arguments (nullary constant)
    Nil,        // empty list
    Add,        // a + b over integers
    Cons,       // h :: t
    Construct,  // C(e1, ..., en): builds a tree node; list arguments splice
    Call,       // f(e1, ..., en): applies the named action to the arguments
  };
  Kind kind = Kind::Nil;
  std::string name;                 // Var/Const/Construct/Call
  std::int64_t int_value = 0;       // Int
  std::string str_value;            // Str
  std::vector<ActionExprPtr> args;  // Add/Cons (2), Construct/Call (n)
  SourceLoc loc;
};

struct Pattern {
  enum class Kind { Var, Wildcard, Int, Cons };
  Kind kind = Kind::Wildcard;
  std::string var;
  std::int64_t int_value = 0;
  std::shared_ptr<const Pattern> head, tail;  // Cons
  SourceLoc loc;
};

struct FunClause {
  std::vector<Pattern> patterns;
  ActionExprPtr body;
  SourceLoc loc;
};

// ---------------------------------------------------------------------------
// Machine expressions

struct MachineExpr;
using MachineExprPtr = std::shared_ptr<const MachineExpr>;

struct MachineExpr {
  enum class Kind { Alt, Seq, Epsilon, Terminal, Ref, CatalogRef, Action };
  Kind kind = Kind::Epsilon;
  std::vector<MachineExprPtr> items;  // Alt branches (>=2) or Seq items (>=2)
  std::vector<double> weights;        // Alt only; empty = unweighted
  std::string text;                   // Terminal text / Ref name / CatalogRef name
  std::vector<std::string> terminal_tokens;  // Terminal text split on whitespace
  std::vector<ActionExprPtr> args;    // Ref arguments
  std::shared_ptr<const FunClause> clause;  // Action
  SourceLoc loc;
  int alt_id = -1;  // assigned by parse_grammar, in definition order
};

struct Definition {
  std::string name;
  std::vector<std::string> params;
  MachineExprPtr body;
  SourceLoc loc;
};

/// Parsed grammar. Definitions keep source order; `start` defaults to the
/// last definition and can be overridden before building an engine.
struct Grammar {
  std::vector<Definition> defs;
  std::map<std::string, std::size_t> index;  // name -> position in defs
  std::string start;
  int alt_count = 0;

  const Definition* find(std::string_view name) const {
    auto it = index.find(std::string(name));
    return it == index.end() ? nullptr : &defs[it->second];
  }
};

/// Parses grammar source (.sg). `#` starts a line comment; `*` binds tighter
/// than `+`; `id` is the empty string; quoted strings are terminals; a `fun`
/// body extends as far right as possible (parenthesize the fun to alternate
/// after it). Throws DslSyntaxError.
Grammar parse_grammar(std::string_view source);

/// Reads and parses a grammar file.
Grammar load_grammar(const std::string& path);

/// Renders a grammar back to source text; parse_grammar(render(g)) == g.
std::string render(const Grammar& grammar);
std::string render(const MachineExpr& expr);
std::string render(const ActionExpr& expr);
std::string render(const Pattern& pattern);

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string machine;
  std::string message;
  SourceLoc loc;
};

/// Static checks: unresolved references, arity mismatches, unbound action
/// variables, left-recursive cycles (reachable through nullable prefixes
/// only, which also covers epsilon loops). Catalog references are checked
/// against `catalog_names` when provided. An empty report means valid.
std::vector<Diagnostic> validate(const Grammar& grammar,
                                 const std::vector<std::string>* catalog_names = nullptr);

bool structurally_equal(const Grammar& a, const Grammar& b);

}  // namespace sempar
