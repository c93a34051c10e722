#include "sempar/engine.hpp"

#include <algorithm>
#include <sstream>

#include "sempar/errors.hpp"

namespace sempar {

std::size_t derivation_node_count(const DerivationNode& d) {
  std::size_t n = 1;
  for (const auto& c : d.children) n += derivation_node_count(*c);
  return n;
}

namespace {

void trace(const DerivationNode& d, std::string& out) {
  switch (d.kind) {
    case DerivationNode::Kind::Machine: out += d.name; break;
    case DerivationNode::Kind::Alt: out += "alt" + std::to_string(d.branch); break;
    case DerivationNode::Kind::Seq: out += "seq"; break;
    case DerivationNode::Kind::Terminal: out += "t"; break;
    case DerivationNode::Kind::Catalog: out += "cat:" + d.name + "=" + d.entity; break;
    case DerivationNode::Kind::Epsilon: out += "eps"; break;
    case DerivationNode::Kind::Action: out += "act"; break;
  }
  out += '[' + std::to_string(d.span.begin) + ':' + std::to_string(d.span.end) + ']';
  if (!d.children.empty()) {
    out += '{';
    for (std::size_t i = 0; i < d.children.size(); ++i) {
      if (i) out += ' ';
      trace(*d.children[i], out);
    }
    out += '}';
  }
}

}  // namespace

std::string derivation_trace(const DerivationNode& d) {
  std::string out;
  trace(d, out);
  return out;
}

// ---------------------------------------------------------------------------
// Branch probabilities

namespace {

void assign_alt_probs(const Definition& def, const MachineExpr& e, bool outermost,
                      const BranchCounts* counts, std::vector<std::vector<double>>& probs) {
  if (e.kind == MachineExpr::Kind::Alt) {
    std::size_t n = e.items.size();
    std::vector<double> p;
    bool have_counts = false;
    if (outermost && counts) {
      p.assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        auto it = counts->find({def.name, static_cast<int>(i)});
        if (it != counts->end()) {
          have_counts = true;
          p[i] = it->second;
        }
      }
    }
    if (!have_counts) {
      if (!e.weights.empty())
        p = e.weights;
      else
        p.assign(n, 1.0);
    }
    double total = 0;
    for (double w : p) {
      if (w < 0) throw Error("negative branch weight in " + def.name);
      total += w;
    }
    if (total <= 0)
      throw Error("branch counts for machine '" + def.name + "' are all zero");
    for (double& w : p) w /= total;
    probs[e.alt_id] = std::move(p);
    for (const auto& b : e.items) assign_alt_probs(def, *b, false, counts, probs);
    return;
  }
  for (const auto& i : e.items) assign_alt_probs(def, *i, false, counts, probs);
  // Ref arguments and action bodies hold no alternations.
}

}  // namespace

std::vector<std::vector<double>> branch_probabilities(const Grammar& grammar,
                                                      const BranchCounts* counts) {
  std::vector<std::vector<double>> probs(grammar.alt_count);
  for (const auto& def : grammar.defs) assign_alt_probs(def, *def.body, true, counts, probs);
  return probs;
}

// ---------------------------------------------------------------------------
// Search

namespace {

struct SearchOut {
  std::size_t end = 0;
  DerivPtr node;
  double prob = 1.0;
};

struct Searcher {
  const Engine& engine;
  const Grammar& grammar;
  std::span<const std::string> tokens;
  bool memo_on;
  std::size_t cap;
  bool truncated = false;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<SearchOut>> memo;
  std::vector<std::pair<std::size_t, std::size_t>> active;

  std::vector<SearchOut> machine_outs(std::size_t def_idx, std::size_t pos) {
    auto key = std::make_pair(def_idx, pos);
    if (memo_on) {
      auto it = memo.find(key);
      if (it != memo.end()) return it->second;
    }
    if (std::find(active.begin(), active.end(), key) != active.end())
      throw Error("internal: machine '" + grammar.defs[def_idx].name +
                  "' re-entered at the same position (undetected left recursion)");
    active.push_back(key);
    std::vector<SearchOut> outs = run_expr(*grammar.defs[def_idx].body, pos);
    active.pop_back();
    if (outs.size() > cap) {
      outs.resize(cap);
      truncated = true;
    }
    if (memo_on) memo[key] = outs;
    return outs;
  }

  std::vector<SearchOut> run_expr(const MachineExpr& e, std::size_t pos) {
    switch (e.kind) {
      case MachineExpr::Kind::Epsilon: {
        auto node = std::make_shared<DerivationNode>();
        node->kind = DerivationNode::Kind::Epsilon;
        node->span = {static_cast<std::uint32_t>(pos), static_cast<std::uint32_t>(pos)};
        return {{pos, node, 1.0}};
      }
      case MachineExpr::Kind::Action: {
        auto node = std::make_shared<DerivationNode>();
        node->kind = DerivationNode::Kind::Action;
        node->expr = &e;
        node->span = {static_cast<std::uint32_t>(pos), static_cast<std::uint32_t>(pos)};
        return {{pos, node, 1.0}};
      }
      case MachineExpr::Kind::Terminal: {
        const auto& want = e.terminal_tokens;
        if (pos + want.size() > tokens.size()) return {};
        for (std::size_t i = 0; i < want.size(); ++i)
          if (tokens[pos + i] != want[i]) return {};
        auto node = std::make_shared<DerivationNode>();
        node->kind = DerivationNode::Kind::Terminal;
        node->span = {static_cast<std::uint32_t>(pos),
                      static_cast<std::uint32_t>(pos + want.size())};
        return {{pos + want.size(), node, 1.0}};
      }
      case MachineExpr::Kind::CatalogRef: {
        const Catalog* cat = engine.catalogs().find(e.text);
        if (!cat) return {};
        std::vector<SearchOut> outs;
        for (const auto& m : cat->lookup(tokens, pos)) {
          auto node = std::make_shared<DerivationNode>();
          node->kind = DerivationNode::Kind::Catalog;
          node->name = e.text;
          node->entity = m.entity;
          node->prob_factor = m.prob;
          node->span = {static_cast<std::uint32_t>(pos), static_cast<std::uint32_t>(m.end)};
          outs.push_back({m.end, node, m.prob});
        }
        return outs;
      }
      case MachineExpr::Kind::Ref: {
        auto it = grammar.index.find(e.text);
        if (it == grammar.index.end())
          throw Error("unresolved reference '" + e.text + "' at parse time");
        std::vector<SearchOut> outs;
        for (const auto& sub : machine_outs(it->second, pos)) {
          auto node = std::make_shared<DerivationNode>();
          node->kind = DerivationNode::Kind::Machine;
          node->name = e.text;
          node->expr = &e;
          node->span = {static_cast<std::uint32_t>(pos), static_cast<std::uint32_t>(sub.end)};
          node->children = {sub.node};
          outs.push_back({sub.end, node, sub.prob});
        }
        return outs;
      }
      case MachineExpr::Kind::Seq: {
        // Depth-first over item combinations, leftmost item outermost.
        struct Partial {
          std::size_t end;
          double prob;
          std::vector<DerivPtr> parts;
        };
        std::vector<Partial> partials = {{pos, 1.0, {}}};
        for (const auto& item : e.items) {
          std::vector<Partial> next;
          for (const auto& p : partials) {
            for (const auto& sub : run_expr(*item, p.end)) {
              Partial np{sub.end, p.prob * sub.prob, p.parts};
              np.parts.push_back(sub.node);
              next.push_back(std::move(np));
            }
          }
          partials = std::move(next);
          if (partials.empty()) break;
        }
        std::vector<SearchOut> outs;
        for (auto& p : partials) {
          auto node = std::make_shared<DerivationNode>();
          node->kind = DerivationNode::Kind::Seq;
          node->span = {static_cast<std::uint32_t>(pos), static_cast<std::uint32_t>(p.end)};
          node->children = std::move(p.parts);
          outs.push_back({p.end, node, p.prob});
        }
        return outs;
      }
      case MachineExpr::Kind::Alt: {
        const auto& probs = engine.alt_probs()[e.alt_id];
        std::vector<SearchOut> outs;
        for (std::size_t b = 0; b < e.items.size(); ++b) {
          if (probs[b] <= 0.0) continue;  // zero-count branch is disabled
          for (const auto& sub : run_expr(*e.items[b], pos)) {
            auto node = std::make_shared<DerivationNode>();
            node->kind = DerivationNode::Kind::Alt;
            node->branch = static_cast<int>(b);
            node->prob_factor = probs[b];
            node->span = sub.node->span;
            node->span.begin = static_cast<std::uint32_t>(pos);
            node->children = {sub.node};
            outs.push_back({sub.end, node, sub.prob * probs[b]});
          }
        }
        return outs;
      }
    }
    return {};
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(Grammar grammar, CatalogSet catalogs, EngineOptions options,
               const BranchCounts* counts)
    : grammar_(std::move(grammar)), catalogs_(std::move(catalogs)), options_(options) {
  if (options_.check_grammar) {
    auto names = catalogs_.names();
    auto diags = validate(grammar_, &names);
    if (!diags.empty()) {
      std::ostringstream msg;
      msg << "grammar failed validation:";
      for (const auto& d : diags) msg << "\n  [" << d.machine << "] " << d.message;
      throw Error(msg.str());
    }
  }
  alt_probs_ = branch_probabilities(grammar_, counts);
}

// ---------------------------------------------------------------------------
// Replay

namespace {

using List = SemValue::List;
using ListPtr = SemValue::ListPtr;

ListPtr make_list(std::vector<SemValue> items) {
  auto l = std::make_shared<List>();
  l->items = std::move(items);
  return l;
}

Span hull(Span a, Span b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return {std::min(a.begin, b.begin), std::max(a.end, b.end)};
}

struct Replayer {
  const Engine& engine;
  std::span<const std::string> tokens;
  std::vector<SemValue> stack;  // front = top
  std::size_t pos = 0;
  std::unordered_map<const SemTree*, Span> spans;

  using Env = std::map<std::string, SemValue>;

  [[noreturn]] void fail(const std::string& msg) { throw ActionError(msg); }

  void walk(const DerivationNode& d, const Env& env) {
    switch (d.kind) {
      case DerivationNode::Kind::Epsilon:
        return;
      case DerivationNode::Kind::Terminal:
        pos = d.span.end;
        return;
      case DerivationNode::Kind::Catalog: {
        SemValue v;
        v.data = SemTree::Entity{d.entity};
        v.span = d.span;
        stack.insert(stack.begin(), std::move(v));
        pos = d.span.end;
        return;
      }
      case DerivationNode::Kind::Seq:
      case DerivationNode::Kind::Alt:
        for (const auto& c : d.children) walk(*c, env);
        return;
      case DerivationNode::Kind::Machine: {
        const Definition* def = engine.grammar().find(d.name);
        if (!def) fail("unknown machine '" + d.name + "' in derivation");
        Env inner;
        if (d.expr) {
          if (d.expr->args.size() != def->params.size())
            fail("argument count mismatch calling '" + d.name + "'");
          for (std::size_t i = 0; i < def->params.size(); ++i)
            inner[def->params[i]] = eval(*d.expr->args[i], env);
        } else if (!def->params.empty()) {
          fail("start machine '" + d.name + "' takes parameters");
        }
        for (const auto& c : d.children) walk(*c, inner);
        return;
      }
      case DerivationNode::Kind::Action: {
        apply_clause(*d.expr->clause, env);
        return;
      }
    }
  }

  void apply_clause(const FunClause& clause, const Env& outer) {
    Env env = outer;
    // p1..p(n-1) take the top cells; the last pattern takes the rest of the
    // stack as a list.
    std::size_t n = clause.patterns.size();
    std::vector<SemValue> cells = stack;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (cells.empty()) fail("semantic stack underflow in action");
      if (!match(clause.patterns[i], cells.front(), env))
        fail("action pattern did not match stack cell");
      cells.erase(cells.begin());
    }
    SemValue rest;
    rest.data = make_list(std::move(cells));
    if (!match(clause.patterns[n - 1], rest, env))
      fail("action pattern did not match semantic stack");
    SemValue result = eval(*clause.body, env);
    if (!result.is_list()) fail("action body must produce a stack (a list)");
    stack = std::get<ListPtr>(result.data)->items;
  }

  bool match(const Pattern& p, const SemValue& v, Env& env) {
    switch (p.kind) {
      case Pattern::Kind::Wildcard:
        return true;
      case Pattern::Kind::Var:
        env[p.var] = v;
        return true;
      case Pattern::Kind::Int:
        return std::holds_alternative<std::int64_t>(v.data) &&
               std::get<std::int64_t>(v.data) == p.int_value;
      case Pattern::Kind::Cons: {
        if (!v.is_list()) return false;
        const auto& items = std::get<ListPtr>(v.data)->items;
        if (items.empty()) return false;
        if (!match(*p.head, items.front(), env)) return false;
        SemValue tail;
        tail.data = make_list({items.begin() + 1, items.end()});
        return match(*p.tail, tail, env);
      }
    }
    return false;
  }

  SemValue eval(const ActionExpr& e, const Env& env) {
    SemValue v;
    switch (e.kind) {
      case ActionExpr::Kind::Var: {
        auto it = env.find(e.name);
        if (it == env.end()) fail("unbound variable '" + e.name + "'");
        return it->second;
      }
      case ActionExpr::Kind::Int:
        v.data = e.int_value;
        return v;
      case ActionExpr::Kind::Str:
        v.data = e.str_value;
        return v;
      case ActionExpr::Kind::Const: {
        auto it = env.find(e.name);
        if (it != env.end()) return it->second;
        v.data = SemTree::Entity{e.name};
        return v;
      }
      case ActionExpr::Kind::Nil:
        v.data = make_list({});
        return v;
      case ActionExpr::Kind::Add: {
        SemValue a = eval(*e.args[0], env);
        SemValue b = eval(*e.args[1], env);
        if (!std::holds_alternative<std::int64_t>(a.data) ||
            !std::holds_alternative<std::int64_t>(b.data))
          fail("'+' needs integer operands");
        v.data = std::get<std::int64_t>(a.data) + std::get<std::int64_t>(b.data);
        v.span = hull(a.span, b.span);
        return v;
      }
      case ActionExpr::Kind::Cons: {
        SemValue h = eval(*e.args[0], env);
        SemValue t = eval(*e.args[1], env);
        if (!t.is_list()) fail("'::' needs a list on the right");
        std::vector<SemValue> items;
        items.push_back(std::move(h));
        const auto& rest = std::get<ListPtr>(t.data)->items;
        items.insert(items.end(), rest.begin(), rest.end());
        v.data = make_list(std::move(items));
        return v;
      }
      case ActionExpr::Kind::Construct: {
        std::vector<SemTreePtr> kids;
        Span ingredients;
        for (const auto& arg : e.args) {
          SemValue a = eval(*arg, env);
          if (a.is_list()) {
            for (const auto& item : std::get<ListPtr>(a.data)->items) {
              ingredients = hull(ingredients, item.span);
              append_child(kids, item);
            }
          } else {
            ingredients = hull(ingredients, a.span);
            append_child(kids, a);
          }
        }
        if (kids.empty()) fail("constructor " + e.name + " built with no children");
        SemTreePtr node;
        try {
          node = SemTree::make(e.name, std::move(kids));
        } catch (const Error& err) {
          fail(err.what());
        }
        // The node owns every token consumed from its first ingredient up to
        // the current parse position; that is what TOP conversion wraps.
        std::uint32_t here = static_cast<std::uint32_t>(pos);
        Span s = ingredients.empty() ? Span{here, here} : Span{ingredients.begin, here};
        spans[node.get()] = s;
        v.data = node;
        v.span = s;
        return v;
      }
      case ActionExpr::Kind::Call: {
        const Definition* def = engine.grammar().find(e.name);
        if (!def || def->body->kind != MachineExpr::Kind::Action)
          fail("'" + e.name + "' is not a callable action");
        std::vector<SemValue> args;
        for (const auto& arg : e.args) args.push_back(eval(*arg, env));
        std::vector<SemValue> saved = std::move(stack);
        stack = std::move(args);
        apply_clause(*def->body->clause, Env{});
        if (stack.size() != 1) fail("call to '" + e.name + "' did not produce a single value");
        SemValue out = std::move(stack.front());
        stack = std::move(saved);
        return out;
      }
    }
    return v;
  }

  void append_child(std::vector<SemTreePtr>& kids, const SemValue& v) {
    if (std::holds_alternative<SemTreePtr>(v.data)) {
      kids.push_back(std::get<SemTreePtr>(v.data));
      return;
    }
    if (std::holds_alternative<std::int64_t>(v.data)) {
      SemTreePtr leaf = SemTree::integer(std::get<std::int64_t>(v.data));
      spans[leaf.get()] = v.span;
      kids.push_back(std::move(leaf));
      return;
    }
    if (std::holds_alternative<std::string>(v.data)) {
      SemTreePtr leaf = SemTree::resolved_string(std::get<std::string>(v.data));
      spans[leaf.get()] = v.span;
      kids.push_back(std::move(leaf));
      return;
    }
    if (std::holds_alternative<SemTree::Entity>(v.data)) {
      // Entity ids may carry several space-separated symbols (volume values
      // like "2 LITER"); each becomes its own literal leaf.
      const std::string& id = std::get<SemTree::Entity>(v.data).id;
      for (const auto& word : tokenize(id)) {
        SemTreePtr leaf;
        if (!word.empty() && (std::isdigit(static_cast<unsigned char>(word[0])) != 0) &&
            word.find_first_not_of("0123456789") == std::string::npos)
          leaf = SemTree::integer(std::strtoll(word.c_str(), nullptr, 10));
        else
          leaf = SemTree::entity(word);
        spans[leaf.get()] = v.span;
        kids.push_back(std::move(leaf));
      }
      return;
    }
    fail("a list cannot be a direct tree child");
  }

  SemTreePtr final_tree() {
    if (stack.empty()) {
      // Pure recognizer: no action ever pushed a value.
      return SemTree::entity("NIL");
    }
    if (stack.size() > 1)
      throw StackNotSingletonError("replay finished with " + std::to_string(stack.size()) +
                                   " cells on the semantic stack");
    const SemValue& v = stack.front();
    if (std::holds_alternative<SemTreePtr>(v.data)) return std::get<SemTreePtr>(v.data);
    if (std::holds_alternative<std::int64_t>(v.data)) {
      SemTreePtr leaf = SemTree::integer(std::get<std::int64_t>(v.data));
      spans[leaf.get()] = v.span;
      return leaf;
    }
    if (std::holds_alternative<std::string>(v.data)) {
      SemTreePtr leaf = SemTree::resolved_string(std::get<std::string>(v.data));
      spans[leaf.get()] = v.span;
      return leaf;
    }
    if (std::holds_alternative<SemTree::Entity>(v.data)) {
      SemTreePtr leaf = SemTree::entity(std::get<SemTree::Entity>(v.data).id);
      spans[leaf.get()] = v.span;
      return leaf;
    }
    throw StackNotSingletonError("replay finished with a bare list on the semantic stack");
  }
};

}  // namespace

Engine::Replayed Engine::replay(const DerivationNode& derivation,
                                std::span<const std::string> tokens) const {
  Replayer r{*this, tokens, {}, 0, {}};
  r.walk(derivation, {});
  Replayed out;
  out.exr = r.final_tree();
  out.spans = std::move(r.spans);
  return out;
}

// ---------------------------------------------------------------------------
// Parse

ParseResult Engine::parse(std::span<const std::string> tokens, std::size_t top_k) const {
  auto it = grammar_.index.find(grammar_.start);
  if (it == grammar_.index.end()) throw Error("start machine '" + grammar_.start + "' not found");

  Searcher searcher{*this,
                    grammar_,
                    tokens,
                    options_.memoize,
                    static_cast<std::size_t>(std::max(1, options_.max_ambiguity)),
                    false,
                    {},
                    {}};
  std::vector<SearchOut> outs = searcher.machine_outs(it->second, 0);

  ParseResult result;
  result.truncated = searcher.truncated;

  std::vector<ParseItem> items;
  std::size_t full_span = 0;
  std::string first_error;
  bool first_error_stack = false;
  for (const auto& out : outs) {
    if (out.end != tokens.size()) continue;
    ++full_span;
    auto root = std::make_shared<DerivationNode>();
    root->kind = DerivationNode::Kind::Machine;
    root->name = grammar_.start;
    root->span = {0, static_cast<std::uint32_t>(out.end)};
    root->children = {out.node};
    try {
      Replayed rep = replay(*root, tokens);
      items.push_back({rep.exr, root, out.prob, derivation_node_count(*root)});
    } catch (const StackNotSingletonError& e) {
      if (first_error.empty()) { first_error = e.what(); first_error_stack = true; }
      result.notes.push_back(std::string("derivation dropped: ") + e.what());
    } catch (const Error& e) {
      if (first_error.empty()) first_error = e.what();
      result.notes.push_back(std::string("derivation dropped: ") + e.what());
    }
  }
  if (items.empty() && full_span > 0 && !first_error.empty()) {
    // Every completed derivation failed action replay; surface the failure
    // rather than pretending the input is outside the language.
    if (first_error_stack) throw StackNotSingletonError(first_error);
    throw ActionError(first_error);
  }

  std::vector<std::pair<std::string, std::size_t>> order;
  order.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i)
    order.emplace_back(linearize(items[i].exr), i);
  std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    const ParseItem& x = items[a.second];
    const ParseItem& y = items[b.second];
    if (x.prob != y.prob) return x.prob > y.prob;
    if (x.node_count != y.node_count) return x.node_count < y.node_count;
    return a.first < b.first;
  });
  for (const auto& [text, idx] : order) {
    if (result.items.size() >= top_k) break;
    result.items.push_back(items[idx]);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Derivation -> TOP

namespace {

struct TopBuilder {
  std::span<const std::string> tokens;
  const std::unordered_map<const SemTree*, Span>& spans;

  Span span_of(const SemTreePtr& node) const {
    auto it = spans.find(node.get());
    return it == spans.end() ? Span{} : it->second;
  }

  SemTreePtr convert(const SemTreePtr& node, Span range) {
    if (!node->is_constructor()) return node;
    if (range.empty()) return node;  // no tokens anywhere below

    std::vector<SemTreePtr> kids;
    if (is_leaf_slot(*node)) {
      // Slot values surface as the tokens the alias matched.
      for (std::uint32_t i = range.begin; i < range.end; ++i)
        kids.push_back(SemTree::token(tokens[i]));
      for (const auto& c : node->children())
        if (span_of(c).empty()) kids.push_back(c);
      return SemTree::make(node->name(), std::move(kids));
    }

    struct Spanned {
      Span span;
      SemTreePtr child;
    };
    std::vector<Spanned> spanned;
    std::vector<SemTreePtr> spanless;
    for (const auto& c : node->children()) {
      Span s = span_of(c);
      if (s.empty())
        spanless.push_back(c);
      else
        spanned.push_back({s, c});
    }
    std::stable_sort(spanned.begin(), spanned.end(),
                     [](const Spanned& a, const Spanned& b) { return a.span.begin < b.span.begin; });
    std::uint32_t cursor = range.begin;
    for (const auto& [s, child] : spanned) {
      if (s.begin < cursor || s.end > range.end)
        throw Error("derivation/token mismatch: child spans overlap or escape their parent");
      for (std::uint32_t i = cursor; i < s.begin; ++i)
        kids.push_back(SemTree::token(tokens[i]));
      if (child->is_constructor()) {
        kids.push_back(convert(child, s));
      } else {
        // Surface literal outside a slot: emit its tokens.
        for (std::uint32_t i = s.begin; i < s.end; ++i)
          kids.push_back(SemTree::token(tokens[i]));
      }
      cursor = s.end;
    }
    for (std::uint32_t i = cursor; i < range.end; ++i)
      kids.push_back(SemTree::token(tokens[i]));
    for (const auto& c : spanless) kids.push_back(convert(c, Span{}));
    if (kids.empty()) return node;
    return SemTree::make(node->name(), std::move(kids));
  }
};

}  // namespace

SemTreePtr Engine::derivation_to_top(const DerivationNode& derivation,
                                     std::span<const std::string> tokens) const {
  Replayed rep = replay(derivation, tokens);
  if (!rep.exr->is_constructor())
    throw Error("TOP conversion needs a constructor-rooted EXR; got a bare literal");
  TopBuilder builder{tokens, rep.spans};
  // The root wraps the whole utterance, leading and trailing carriers included.
  return builder.convert(rep.exr, Span{0, static_cast<std::uint32_t>(tokens.size())});
}

}  // namespace sempar
