#include "sempar/grammar.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "sempar/errors.hpp"
#include "sempar/semtree.hpp"

namespace sempar {

namespace {

enum class Tok {
  End, Def, Fun, Id, Catalog, Nil, LIdent, UIdent, Number, String,
  Equals, Plus, Star, LParen, RParen, LBracket, RBracket, Comma,
  ColonColon, Arrow, Underscore,
};

struct Token {
  Tok type = Tok::End;
  std::string text;
  double number = 0;
  bool integral = false;
  SourceLoc loc;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_ws_and_comments();
    Token t;
    t.loc = {line_, col_};
    if (pos_ >= src_.size()) return t;
    char c = src_[pos_];
    if (c == '"') return lex_string(t);
    if (std::isdigit(static_cast<unsigned char>(c))) return lex_number(t);
    if (std::isalpha(static_cast<unsigned char>(c))) return lex_ident(t);
    switch (c) {
      case '=':
        if (peek(1) == '>') { advance(2); t.type = Tok::Arrow; return t; }
        advance(1); t.type = Tok::Equals; return t;
      case ':':
        if (peek(1) == ':') { advance(2); t.type = Tok::ColonColon; return t; }
        break;
      case '+': advance(1); t.type = Tok::Plus; return t;
      case '*': advance(1); t.type = Tok::Star; return t;
      case '(': advance(1); t.type = Tok::LParen; return t;
      case ')': advance(1); t.type = Tok::RParen; return t;
      case '[': advance(1); t.type = Tok::LBracket; return t;
      case ']': advance(1); t.type = Tok::RBracket; return t;
      case ',': advance(1); t.type = Tok::Comma; return t;
      case '_':
        advance(1); t.type = Tok::Underscore; return t;
      default: break;
    }
    throw DslSyntaxError(std::string("unexpected character '") + c + "'", line_, col_);
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') { ++line_; col_ = 1; } else { ++col_; }
      ++pos_;
    }
  }

  void skip_ws_and_comments() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance(1);
      if (pos_ < src_.size() && src_[pos_] == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance(1);
        continue;
      }
      return;
    }
  }

  Token lex_string(Token t) {
    advance(1);
    std::string out;
    while (pos_ < src_.size() && src_[pos_] != '"') {
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
        advance(1);
        char e = src_[pos_];
        out.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
        advance(1);
        continue;
      }
      if (src_[pos_] == '\n') throw DslSyntaxError("unterminated string", t.loc.line, t.loc.column);
      out.push_back(src_[pos_]);
      advance(1);
    }
    if (pos_ >= src_.size()) throw DslSyntaxError("unterminated string", t.loc.line, t.loc.column);
    advance(1);
    t.type = Tok::String;
    t.text = std::move(out);
    return t;
  }

  Token lex_number(Token t) {
    std::size_t start = pos_;
    bool integral = true;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance(1);
    if (pos_ < src_.size() && src_[pos_] == '.' &&
        std::isdigit(static_cast<unsigned char>(peek(1)))) {
      integral = false;
      advance(1);
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance(1);
    }
    t.type = Tok::Number;
    t.text = std::string(src_.substr(start, pos_ - start));
    t.number = std::strtod(t.text.c_str(), nullptr);
    t.integral = integral;
    return t;
  }

  Token lex_ident(Token t) {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      advance(1);
    t.text = std::string(src_.substr(start, pos_ - start));
    if (t.text == "def") t.type = Tok::Def;
    else if (t.text == "fun") t.type = Tok::Fun;
    else if (t.text == "id") t.type = Tok::Id;
    else if (t.text == "catalog") t.type = Tok::Catalog;
    else if (t.text == "nil") t.type = Tok::Nil;
    else if (std::isupper(static_cast<unsigned char>(t.text[0]))) t.type = Tok::UIdent;
    else t.type = Tok::LIdent;
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { shift(); }

  Grammar parse_file() {
    Grammar g;
    while (cur_.type != Tok::End) {
      Definition def = parse_def();
      if (g.index.count(def.name))
        throw DslSyntaxError("duplicate definition name '" + def.name + "'", def.loc.line,
                             def.loc.column);
      g.index[def.name] = g.defs.size();
      g.defs.push_back(std::move(def));
    }
    if (g.defs.empty()) throw DslSyntaxError("grammar has no definitions", 1, 1);
    g.start = g.defs.back().name;
    g.alt_count = alt_counter_;
    return g;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw DslSyntaxError(msg, cur_.loc.line, cur_.loc.column);
  }

  void shift() { cur_ = lexer_.next(); }

  void expect(Tok t, const char* what) {
    if (cur_.type != t) fail(std::string("expected ") + what);
    shift();
  }

  Definition parse_def() {
    Definition def;
    def.loc = cur_.loc;
    expect(Tok::Def, "'def'");
    if (cur_.type != Tok::LIdent && cur_.type != Tok::UIdent) fail("expected definition name");
    def.name = cur_.text;
    shift();
    if (cur_.type == Tok::LParen) {
      shift();
      for (;;) {
        if (cur_.type != Tok::LIdent && cur_.type != Tok::UIdent) fail("expected parameter name");
        def.params.push_back(cur_.text);
        shift();
        if (cur_.type == Tok::Comma) { shift(); continue; }
        break;
      }
      expect(Tok::RParen, "')'");
    }
    expect(Tok::Equals, "'='");
    def.body = parse_alt();
    return def;
  }

  // alt := branch ('+' branch)* ; branch := seq ('[' number ']')?
  MachineExprPtr parse_alt() {
    std::vector<MachineExprPtr> branches;
    std::vector<double> weights;
    bool any_weight = false;
    for (;;) {
      branches.push_back(parse_seq());
      double w = 1.0;
      if (cur_.type == Tok::LBracket) {
        shift();
        if (cur_.type != Tok::Number) fail("expected branch weight");
        w = cur_.number;
        any_weight = true;
        shift();
        expect(Tok::RBracket, "']'");
      }
      weights.push_back(w);
      if (cur_.type == Tok::Plus) { shift(); continue; }
      break;
    }
    if (branches.size() == 1) {
      if (any_weight) fail("branch weight on a non-alternation expression");
      return branches[0];
    }
    auto e = std::make_shared<MachineExpr>();
    e->kind = MachineExpr::Kind::Alt;
    e->loc = branches[0]->loc;
    e->items = std::move(branches);
    if (any_weight) e->weights = std::move(weights);
    e->alt_id = alt_counter_++;
    return e;
  }

  MachineExprPtr parse_seq() {
    std::vector<MachineExprPtr> items;
    items.push_back(parse_primary());
    while (cur_.type == Tok::Star) {
      shift();
      items.push_back(parse_primary());
    }
    if (items.size() == 1) return items[0];
    auto e = std::make_shared<MachineExpr>();
    e->kind = MachineExpr::Kind::Seq;
    e->loc = items[0]->loc;
    e->items = std::move(items);
    return e;
  }

  MachineExprPtr parse_primary() {
    auto e = std::make_shared<MachineExpr>();
    e->loc = cur_.loc;
    switch (cur_.type) {
      case Tok::Id:
        shift();
        e->kind = MachineExpr::Kind::Epsilon;
        return e;
      case Tok::String:
        e->kind = MachineExpr::Kind::Terminal;
        e->text = cur_.text;
        e->terminal_tokens = tokenize(cur_.text);
        shift();
        return e;
      case Tok::Catalog: {
        shift();
        expect(Tok::LParen, "'('");
        if (cur_.type != Tok::String) fail("expected catalog name string");
        e->kind = MachineExpr::Kind::CatalogRef;
        e->text = cur_.text;
        shift();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Fun: {
        e->kind = MachineExpr::Kind::Action;
        e->clause = std::make_shared<FunClause>(parse_fun());
        return e;
      }
      case Tok::LIdent:
      case Tok::UIdent: {
        e->kind = MachineExpr::Kind::Ref;
        e->text = cur_.text;
        shift();
        if (cur_.type == Tok::LParen) {
          shift();
          for (;;) {
            e->args.push_back(parse_action_expr());
            if (cur_.type == Tok::Comma) { shift(); continue; }
            break;
          }
          expect(Tok::RParen, "')'");
        }
        return e;
      }
      case Tok::LParen: {
        shift();
        auto inner = parse_alt();
        expect(Tok::RParen, "')'");
        return inner;
      }
      default:
        fail("expected a machine expression");
    }
  }

  FunClause parse_fun() {
    FunClause clause;
    clause.loc = cur_.loc;
    expect(Tok::Fun, "'fun'");
    for (;;) {
      clause.patterns.push_back(parse_pattern());
      if (cur_.type == Tok::Comma) { shift(); continue; }
      break;
    }
    expect(Tok::Arrow, "'=>'");
    clause.body = parse_action_expr();
    return clause;
  }

  Pattern parse_pattern() {
    Pattern p = parse_pattern_atom();
    if (cur_.type == Tok::ColonColon) {
      shift();
      Pattern tail = parse_pattern();  // right associative
      Pattern cons;
      cons.kind = Pattern::Kind::Cons;
      cons.loc = p.loc;
      cons.head = std::make_shared<Pattern>(std::move(p));
      cons.tail = std::make_shared<Pattern>(std::move(tail));
      return cons;
    }
    return p;
  }

  Pattern parse_pattern_atom() {
    Pattern p;
    p.loc = cur_.loc;
    switch (cur_.type) {
      case Tok::Underscore:
        p.kind = Pattern::Kind::Wildcard;
        shift();
        return p;
      case Tok::LIdent:
      case Tok::UIdent:
        p.kind = Pattern::Kind::Var;
        p.var = cur_.text;
        shift();
        return p;
      case Tok::Number:
        if (!cur_.integral) fail("patterns may only use integer literals");
        p.kind = Pattern::Kind::Int;
        p.int_value = static_cast<std::int64_t>(cur_.number);
        shift();
        return p;
      case Tok::LParen: {
        shift();
        Pattern inner = parse_pattern();
        expect(Tok::RParen, "')'");
        return inner;
      }
      default:
        fail("expected a pattern");
    }
  }

  // actionexpr := addexpr ('::' actionexpr)? ; addexpr := atom ('+' atom)*
  ActionExprPtr parse_action_expr() {
    ActionExprPtr lhs = parse_add_expr();
    if (cur_.type == Tok::ColonColon) {
      shift();
      ActionExprPtr tail = parse_action_expr();
      auto e = std::make_shared<ActionExpr>();
      e->kind = ActionExpr::Kind::Cons;
      e->loc = lhs->loc;
      e->args = {lhs, tail};
      return e;
    }
    return lhs;
  }

  ActionExprPtr parse_add_expr() {
    ActionExprPtr lhs = parse_action_atom();
    while (cur_.type == Tok::Plus) {
      shift();
      ActionExprPtr rhs = parse_action_atom();
      auto e = std::make_shared<ActionExpr>();
      e->kind = ActionExpr::Kind::Add;
      e->loc = lhs->loc;
      e->args = {lhs, rhs};
      lhs = e;
    }
    return lhs;
  }

  ActionExprPtr parse_action_atom() {
    auto e = std::make_shared<ActionExpr>();
    e->loc = cur_.loc;
    switch (cur_.type) {
      case Tok::Number:
        if (!cur_.integral) fail("action expressions may only use integer literals");
        e->kind = ActionExpr::Kind::Int;
        e->int_value = static_cast<std::int64_t>(cur_.number);
        shift();
        return e;
      case Tok::String:
        e->kind = ActionExpr::Kind::Str;
        e->str_value = cur_.text;
        shift();
        return e;
      case Tok::Nil:
        e->kind = ActionExpr::Kind::Nil;
        shift();
        return e;
      case Tok::UIdent:
      case Tok::LIdent: {
        bool upper = cur_.type == Tok::UIdent;
        e->name = cur_.text;
        shift();
        if (cur_.type == Tok::LParen) {
          shift();
          for (;;) {
            e->args.push_back(parse_action_expr());
            if (cur_.type == Tok::Comma) { shift(); continue; }
            break;
          }
          expect(Tok::RParen, "')'");
          e->kind = upper ? ActionExpr::Kind::Construct : ActionExpr::Kind::Call;
        } else {
          e->kind = upper ? ActionExpr::Kind::Const : ActionExpr::Kind::Var;
        }
        return e;
      }
      case Tok::LParen: {
        shift();
        ActionExprPtr inner = parse_action_expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      default:
        fail("expected an action expression");
    }
  }

  Lexer lexer_;
  Token cur_;
  int alt_counter_ = 0;
};

}  // namespace

Grammar parse_grammar(std::string_view source) {
  Parser p(source);
  return p.parse_file();
}

Grammar load_grammar(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open grammar file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_grammar(ss.str());
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string format_weight(double w) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", w);
  return buf;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

void render_machine(const MachineExpr& e, std::string& out, bool parenthesize_compound);

void render_branch(const MachineExpr& e, std::string& out) {
  // Branches and sequence items need parens around nested compounds so the
  // structure survives a round trip.
  render_machine(e, out, true);
}

void render_machine(const MachineExpr& e, std::string& out, bool parenthesize_compound) {
  switch (e.kind) {
    case MachineExpr::Kind::Epsilon:
      out += "id";
      return;
    case MachineExpr::Kind::Terminal:
      out += quote(e.text);
      return;
    case MachineExpr::Kind::CatalogRef:
      out += "catalog(" + quote(e.text) + ")";
      return;
    case MachineExpr::Kind::Ref: {
      out += e.text;
      if (!e.args.empty()) {
        out += '(';
        for (std::size_t i = 0; i < e.args.size(); ++i) {
          if (i) out += ", ";
          out += render(*e.args[i]);
        }
        out += ')';
      }
      return;
    }
    case MachineExpr::Kind::Action: {
      if (parenthesize_compound) out += '(';
      out += "fun ";
      for (std::size_t i = 0; i < e.clause->patterns.size(); ++i) {
        if (i) out += ", ";
        out += render(e.clause->patterns[i]);
      }
      out += " => ";
      out += render(*e.clause->body);
      if (parenthesize_compound) out += ')';
      return;
    }
    case MachineExpr::Kind::Seq: {
      if (parenthesize_compound) out += '(';
      for (std::size_t i = 0; i < e.items.size(); ++i) {
        if (i) out += " * ";
        render_branch(*e.items[i], out);
      }
      if (parenthesize_compound) out += ')';
      return;
    }
    case MachineExpr::Kind::Alt: {
      if (parenthesize_compound) out += '(';
      for (std::size_t i = 0; i < e.items.size(); ++i) {
        if (i) out += " + ";
        render_branch(*e.items[i], out);
        if (!e.weights.empty()) out += " [" + format_weight(e.weights[i]) + "]";
      }
      if (parenthesize_compound) out += ')';
      return;
    }
  }
}

}  // namespace

std::string render(const Pattern& p) {
  switch (p.kind) {
    case Pattern::Kind::Wildcard: return "_";
    case Pattern::Kind::Var: return p.var;
    case Pattern::Kind::Int: return std::to_string(p.int_value);
    case Pattern::Kind::Cons: {
      std::string head = render(*p.head);
      if (p.head->kind == Pattern::Kind::Cons) head = "(" + head + ")";
      return head + "::" + render(*p.tail);
    }
  }
  return {};
}

std::string render(const ActionExpr& e) {
  switch (e.kind) {
    case ActionExpr::Kind::Var:
    case ActionExpr::Kind::Const:
      return e.name;
    case ActionExpr::Kind::Int:
      return std::to_string(e.int_value);
    case ActionExpr::Kind::Str:
      return quote(e.str_value);
    case ActionExpr::Kind::Nil:
      return "nil";
    case ActionExpr::Kind::Add: {
      auto wrap = [](const ActionExpr& x, bool right) {
        std::string s = render(x);
        bool parens = x.kind == ActionExpr::Kind::Cons ||
                      (right && x.kind == ActionExpr::Kind::Add);
        return parens ? "(" + s + ")" : s;
      };
      return wrap(*e.args[0], false) + " + " + wrap(*e.args[1], true);
    }
    case ActionExpr::Kind::Cons: {
      std::string head = render(*e.args[0]);
      if (e.args[0]->kind == ActionExpr::Kind::Cons) head = "(" + head + ")";
      return head + "::" + render(*e.args[1]);
    }
    case ActionExpr::Kind::Construct:
    case ActionExpr::Kind::Call: {
      std::string out = e.name + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += render(*e.args[i]);
      }
      return out + ")";
    }
  }
  return {};
}

std::string render(const MachineExpr& expr) {
  std::string out;
  render_machine(expr, out, false);
  return out;
}

std::string render(const Grammar& g) {
  std::string out;
  for (const auto& def : g.defs) {
    out += "def " + def.name;
    if (!def.params.empty()) {
      out += '(';
      for (std::size_t i = 0; i < def.params.size(); ++i) {
        if (i) out += ", ";
        out += def.params[i];
      }
      out += ')';
    }
    out += " = " + render(*def.body) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void collect_pattern_vars(const Pattern& p, std::set<std::string>& vars) {
  switch (p.kind) {
    case Pattern::Kind::Var: vars.insert(p.var); break;
    case Pattern::Kind::Cons:
      collect_pattern_vars(*p.head, vars);
      collect_pattern_vars(*p.tail, vars);
      break;
    default: break;
  }
}

struct Validator {
  const Grammar& g;
  const std::vector<std::string>* catalog_names;
  std::vector<Diagnostic> diags;
  std::vector<bool> nullable;

  void error(const Definition& def, SourceLoc loc, std::string msg) {
    diags.push_back({Diagnostic::Severity::Error, def.name, std::move(msg), loc});
  }

  bool catalog_known(const std::string& name) const {
    if (!catalog_names) return true;  // not checked without a catalog set
    for (const auto& n : *catalog_names)
      if (n == name) return true;
    return false;
  }

  void check_action_expr(const Definition& def, const ActionExpr& e,
                         const std::set<std::string>& bound) {
    switch (e.kind) {
      case ActionExpr::Kind::Var:
        if (!bound.count(e.name))
          error(def, e.loc, "unbound variable '" + e.name + "' in action expression");
        break;
      case ActionExpr::Kind::Call: {
        const Definition* target = g.find(e.name);
        if (!target)
          error(def, e.loc, "call to undefined action '" + e.name + "'");
        else if (target->body->kind != MachineExpr::Kind::Action)
          error(def, e.loc, "'" + e.name + "' is not an action and cannot be called");
        for (const auto& a : e.args) check_action_expr(def, *a, bound);
        break;
      }
      default:
        for (const auto& a : e.args) check_action_expr(def, *a, bound);
        break;
    }
  }

  void check_expr(const Definition& def, const MachineExpr& e,
                  const std::set<std::string>& params) {
    switch (e.kind) {
      case MachineExpr::Kind::Ref: {
        const Definition* target = g.find(e.text);
        if (!target) {
          error(def, e.loc, "unresolved reference to '" + e.text + "'");
        } else if (target->params.size() != e.args.size()) {
          error(def, e.loc,
                "'" + e.text + "' takes " + std::to_string(target->params.size()) +
                    " argument(s), got " + std::to_string(e.args.size()));
        }
        for (const auto& a : e.args) check_action_expr(def, *a, params);
        break;
      }
      case MachineExpr::Kind::CatalogRef:
        if (!catalog_known(e.text))
          error(def, e.loc, "unknown catalog '" + e.text + "'");
        break;
      case MachineExpr::Kind::Action: {
        std::set<std::string> bound = params;
        for (const auto& p : e.clause->patterns) collect_pattern_vars(p, bound);
        check_action_expr(def, *e.clause->body, bound);
        break;
      }
      case MachineExpr::Kind::Alt: {
        if (!e.weights.empty()) {
          double total = 0;
          for (double w : e.weights) {
            if (w < 0) error(def, e.loc, "negative branch weight");
            total += w;
          }
          if (total <= 0) error(def, e.loc, "alternation weights sum to zero");
        }
        for (const auto& b : e.items) check_expr(def, *b, params);
        break;
      }
      case MachineExpr::Kind::Seq:
        for (const auto& i : e.items) check_expr(def, *i, params);
        break;
      default:
        break;
    }
  }

  bool expr_nullable(const MachineExpr& e) const {
    switch (e.kind) {
      case MachineExpr::Kind::Epsilon:
      case MachineExpr::Kind::Action:
        return true;
      case MachineExpr::Kind::Terminal:
        return e.terminal_tokens.empty();
      case MachineExpr::Kind::CatalogRef:
        return false;
      case MachineExpr::Kind::Ref: {
        const Definition* target = g.find(e.text);
        if (!target) return false;
        return nullable[g.index.at(e.text)];
      }
      case MachineExpr::Kind::Alt:
        for (const auto& b : e.items)
          if (expr_nullable(*b)) return true;
        return false;
      case MachineExpr::Kind::Seq:
        for (const auto& i : e.items)
          if (!expr_nullable(*i)) return false;
        return true;
    }
    return false;
  }

  void compute_nullable() {
    nullable.assign(g.defs.size(), false);
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < g.defs.size(); ++i) {
        if (!nullable[i] && expr_nullable(*g.defs[i].body)) {
          nullable[i] = true;
          changed = true;
        }
      }
    }
  }

  // Edges N -> M where M is callable from N before any token is consumed.
  void left_edges(const MachineExpr& e, std::set<std::size_t>& out) const {
    switch (e.kind) {
      case MachineExpr::Kind::Ref: {
        auto it = g.index.find(e.text);
        if (it != g.index.end()) out.insert(it->second);
        break;
      }
      case MachineExpr::Kind::Alt:
        for (const auto& b : e.items) left_edges(*b, out);
        break;
      case MachineExpr::Kind::Seq:
        for (const auto& i : e.items) {
          left_edges(*i, out);
          if (!expr_nullable(*i)) break;
        }
        break;
      default:
        break;
    }
  }

  void check_left_recursion() {
    std::size_t n = g.defs.size();
    std::vector<std::set<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i) left_edges(*g.defs[i].body, adj[i]);
    // A definition is left-recursive if it can reach itself along these edges.
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<bool> seen(n, false);
      std::vector<std::size_t> stack(adj[i].begin(), adj[i].end());
      bool cyclic = false;
      while (!stack.empty() && !cyclic) {
        std::size_t v = stack.back();
        stack.pop_back();
        if (v == i) { cyclic = true; break; }
        if (seen[v]) continue;
        seen[v] = true;
        for (std::size_t w : adj[v]) stack.push_back(w);
      }
      if (cyclic)
        diags.push_back({Diagnostic::Severity::Error, g.defs[i].name,
                         "left-recursive (reaches itself without consuming input); "
                         "top-down parsing cannot terminate",
                         g.defs[i].loc});
    }
  }

  std::vector<Diagnostic> run() {
    compute_nullable();
    for (const auto& def : g.defs) {
      std::set<std::string> params(def.params.begin(), def.params.end());
      check_expr(def, *def.body, params);
    }
    check_left_recursion();
    return std::move(diags);
  }
};

}  // namespace

std::vector<Diagnostic> validate(const Grammar& grammar,
                                 const std::vector<std::string>* catalog_names) {
  Validator v{grammar, catalog_names, {}, {}};
  return v.run();
}

// ---------------------------------------------------------------------------
// Structural equality (ignores source locations and alt ids)

namespace {

bool eq(const ActionExpr& a, const ActionExpr& b);
bool eq(const Pattern& a, const Pattern& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Pattern::Kind::Var: return a.var == b.var;
    case Pattern::Kind::Int: return a.int_value == b.int_value;
    case Pattern::Kind::Cons: return eq(*a.head, *b.head) && eq(*a.tail, *b.tail);
    case Pattern::Kind::Wildcard: return true;
  }
  return false;
}

bool eq(const ActionExpr& a, const ActionExpr& b) {
  if (a.kind != b.kind || a.name != b.name || a.int_value != b.int_value ||
      a.str_value != b.str_value || a.args.size() != b.args.size())
    return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!eq(*a.args[i], *b.args[i])) return false;
  return true;
}

bool eq(const MachineExpr& a, const MachineExpr& b) {
  if (a.kind != b.kind || a.text != b.text || a.weights != b.weights ||
      a.items.size() != b.items.size() || a.args.size() != b.args.size())
    return false;
  for (std::size_t i = 0; i < a.items.size(); ++i)
    if (!eq(*a.items[i], *b.items[i])) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!eq(*a.args[i], *b.args[i])) return false;
  if (a.kind == MachineExpr::Kind::Action) {
    if (a.clause->patterns.size() != b.clause->patterns.size()) return false;
    for (std::size_t i = 0; i < a.clause->patterns.size(); ++i)
      if (!eq(a.clause->patterns[i], b.clause->patterns[i])) return false;
    return eq(*a.clause->body, *b.clause->body);
  }
  return true;
}

}  // namespace

bool structurally_equal(const Grammar& a, const Grammar& b) {
  if (a.defs.size() != b.defs.size() || a.start != b.start) return false;
  for (std::size_t i = 0; i < a.defs.size(); ++i) {
    const auto& da = a.defs[i];
    const auto& db = b.defs[i];
    if (da.name != db.name || da.params != db.params || !eq(*da.body, *db.body)) return false;
  }
  return true;
}

}  // namespace sempar
