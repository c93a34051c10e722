#include <doctest.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <set>

#include "helpers.hpp"
#include "sempar/engine.hpp"
#include "sempar/errors.hpp"

using namespace sempar;
using testutil::Rng;

namespace {

const char* kAnBn =
    "def push(t) = fun S => t::S\n"
    "def succ = fun n::S => n+1::S\n"
    "def S = push(0) + \"a\" * S * \"b\" * succ\n";

std::vector<std::string> ab_tokens(int as, int bs) {
  std::vector<std::string> t;
  for (int i = 0; i < as; ++i) t.push_back("a");
  for (int i = 0; i < bs; ++i) t.push_back("b");
  return t;
}

Catalog mini_catalog(const std::string& name,
                     std::vector<std::pair<std::string, std::string>> rows) {
  std::vector<CatalogEntry> entries;
  for (auto& [alias, entity] : rows) entries.push_back({tokenize(alias), entity, 1.0});
  return Catalog(name, std::move(entries));
}

CatalogSet worked_catalogs() {
  CatalogSet cats;
  cats.add(mini_catalog("NUMBER", {{"one", "1"}, {"two", "2"}}));
  cats.add(mini_catalog("SIZE", {{"medium-size", "MEDIUM"}, {"large", "LARGE"}}));
  cats.add(mini_catalog("TOPPING", {{"peppers", "PEPPERS"}, {"ham", "HAM"}, {"onions", "ONIONS"}}));
  return cats;
}

const char* kWorkedGrammar =
    "def number = catalog(\"NUMBER\") * (fun v, S => NUMBER(v)::S)\n"
    "def size = catalog(\"SIZE\") * (fun v, S => SIZE(v)::S)\n"
    "def topping = catalog(\"TOPPING\") * (fun v, S => TOPPING(v)::S)\n"
    "def negtop = (\"but no\" + \"no\") * topping * (fun t, S => NOT(t)::S)\n"
    "def pizza = number * size * \"pizza with\" * topping * \"and\" * topping * negtop\n"
    "            * (fun nt, t2, t1, z, n, S => PIZZAORDER(n, z, t1, t2, nt)::S)\n"
    "def order = pizza * (fun p, S => ORDER(p)::S)\n";

}  // namespace

TEST_CASE("balanced a^n b^n grammar counts pairs with (1/2)^(n+1) probability") {
  Engine engine(parse_grammar(kAnBn), CatalogSet{});
  for (int k : {0, 1, 2, 3, 5, 8}) {
    auto result = engine.parse(ab_tokens(k, k), 10);
    REQUIRE(result.items.size() == 1);
    const auto& item = result.items[0];
    REQUIRE(item.exr->is_literal());
    CHECK(std::get<std::int64_t>(item.exr->literal()) == k);
    CHECK(item.prob == std::pow(0.5, k + 1));
  }
  CHECK(engine.parse(ab_tokens(2, 2), 10).items[0].prob == doctest::Approx(0.125));
  CHECK(engine.parse(ab_tokens(1, 2), 10).items.empty());
  CHECK(engine.parse(ab_tokens(3, 2), 10).items.empty());
}

TEST_CASE("shorter derivations outrank longer ones at equal spans") {
  Grammar g = parse_grammar(
      "def Y = \"b\" + \"c\"\n"
      "def X = \"a\" * \"b\" + \"a\" * Y\n");
  g.start = "X";
  Engine engine(std::move(g), CatalogSet{});
  std::vector<std::string> tokens = {"a", "b"};
  auto result = engine.parse(tokens, 10);
  REQUIRE(result.items.size() == 2);
  CHECK(result.items[0].prob == doctest::Approx(0.5));
  CHECK(result.items[1].prob == doctest::Approx(0.25));
  CHECK(result.items[0].node_count < result.items[1].node_count);
}

TEST_CASE("branch probabilities: uniform, MLE counts, declared weights") {
  Grammar g = parse_grammar("def m = \"a\" + \"b\"");
  auto uniform = branch_probabilities(g);
  REQUIRE(uniform.size() == 1);
  CHECK(uniform[0] == std::vector<double>{0.5, 0.5});

  BranchCounts counts{{{"m", 0}, 3.0}, {{"m", 1}, 1.0}};
  CHECK(branch_probabilities(g, &counts)[0] == std::vector<double>{0.75, 0.25});

  Grammar weighted = parse_grammar("def m = \"a\" [9] + \"b\" [1]");
  CHECK(branch_probabilities(weighted)[0] == std::vector<double>{0.9, 0.1});

  BranchCounts zero{{{"m", 0}, 0.0}, {{"m", 1}, 0.0}};
  CHECK_THROWS_AS(branch_probabilities(g, &zero), Error);
}

TEST_CASE("action replay failures surface as ActionError") {
  // The action demands an integer 1 on top; push provides 0.
  Grammar g = parse_grammar(
      "def push(t) = fun S => t::S\n"
      "def m = push(0) * (fun 1::S => 2::S)\n");
  g.start = "m";
  Engine engine(std::move(g), CatalogSet{});
  std::vector<std::string> tokens;
  CHECK_THROWS_AS(engine.parse(tokens, 10), ActionError);
}

TEST_CASE("two leftover stack cells surface as StackNotSingletonError") {
  Grammar g = parse_grammar(
      "def push(t) = fun S => t::S\n"
      "def m = push(0) * push(1)\n");
  g.start = "m";
  Engine engine(std::move(g), CatalogSet{});
  std::vector<std::string> tokens;
  CHECK_THROWS_AS(engine.parse(tokens, 10), StackNotSingletonError);
}

TEST_CASE("derivation to TOP interleaves slots and carrier tokens") {
  Grammar g = parse_grammar(kWorkedGrammar);
  Engine engine(std::move(g), worked_catalogs());
  auto tokens = tokenize(testutil::kWorkedUtterance);
  auto result = engine.parse(tokens, 5);
  REQUIRE(result.items.size() == 1);
  CHECK(linearize(result.items[0].exr) == testutil::kWorkedExr);
  auto top = engine.derivation_to_top(*result.items[0].derivation, tokens);
  CHECK(linearize(top) == testutil::kWorkedTop);
  CHECK(leaf_tokens(*top) == tokens);
}

TEST_CASE("utterance consumed inside one slot yields a single constructor over all tokens") {
  Grammar g = parse_grammar("def m = catalog(\"TOPPING\") * (fun v, S => TOPPING(v)::S)");
  CatalogSet cats;
  cats.add(mini_catalog("TOPPING", {{"ricotta cheese", "RICOTTA_CHEESE"}}));
  Engine engine(std::move(g), std::move(cats));
  std::vector<std::string> tokens = {"ricotta", "cheese"};
  auto result = engine.parse(tokens, 5);
  REQUIRE(result.items.size() == 1);
  auto top = engine.derivation_to_top(*result.items[0].derivation, tokens);
  CHECK(linearize(top) == "(TOPPING ricotta cheese)");
}

// ---------------------------------------------------------------------------
// Random-grammar suite: memoization transparency, completeness against an
// independent enumeration oracle, probability recomputation, ranking.

namespace {

// Exhaustive derivation enumeration in continuation-passing style. Written
// independently of the engine's search (no memo, no sharing, no caps).
struct EnumOracle {
  const Grammar& g;
  const std::vector<std::vector<double>>& probs;
  std::span<const std::string> tokens;

  void expr(const MachineExpr& e, std::size_t pos, double p,
            const std::function<void(std::size_t, double)>& k) const {
    switch (e.kind) {
      case MachineExpr::Kind::Epsilon:
      case MachineExpr::Kind::Action:
        k(pos, p);
        return;
      case MachineExpr::Kind::Terminal: {
        const auto& want = e.terminal_tokens;
        if (pos + want.size() > tokens.size()) return;
        for (std::size_t i = 0; i < want.size(); ++i)
          if (tokens[pos + i] != want[i]) return;
        k(pos + want.size(), p);
        return;
      }
      case MachineExpr::Kind::CatalogRef:
        return;  // random suite uses no catalogs
      case MachineExpr::Kind::Ref:
        expr(*g.find(e.text)->body, pos, p, k);
        return;
      case MachineExpr::Kind::Seq:
        seq(e, 0, pos, p, k);
        return;
      case MachineExpr::Kind::Alt: {
        for (std::size_t b = 0; b < e.items.size(); ++b) {
          double bp = probs[e.alt_id][b];
          if (bp <= 0) continue;
          expr(*e.items[b], pos, p * bp, k);
        }
        return;
      }
    }
  }

  void seq(const MachineExpr& e, std::size_t item, std::size_t pos, double p,
           const std::function<void(std::size_t, double)>& k) const {
    if (item == e.items.size()) {
      k(pos, p);
      return;
    }
    expr(*e.items[item], pos, p,
         [&](std::size_t end, double q) { seq(e, item + 1, end, q, k); });
  }

  std::vector<double> full_span_probs() const {
    std::vector<double> out;
    expr(*g.find(g.start)->body, 0, 1.0, [&](std::size_t end, double p) {
      if (end == tokens.size()) out.push_back(p);
    });
    std::sort(out.begin(), out.end());
    return out;
  }
};

MachineExprPtr random_engine_expr(Rng& rng, int depth, int ndefs, int* alt_counter) {
  auto e = std::make_shared<MachineExpr>();
  int pick = depth <= 0 ? static_cast<int>(rng.below(3)) : static_cast<int>(rng.below(6));
  switch (pick) {
    case 0:
      e->kind = MachineExpr::Kind::Terminal;
      e->text = std::string(1, static_cast<char>('a' + rng.below(3)));
      e->terminal_tokens = {e->text};
      break;
    case 1:
      e->kind = MachineExpr::Kind::Epsilon;
      break;
    case 2:
      e->kind = MachineExpr::Kind::Ref;
      e->text = "m" + std::to_string(rng.below(ndefs));
      break;
    case 3: {
      e->kind = MachineExpr::Kind::Seq;
      std::size_t n = 2 + rng.below(2);
      for (std::size_t i = 0; i < n; ++i)
        e->items.push_back(random_engine_expr(rng, depth - 1, ndefs, alt_counter));
      break;
    }
    default: {
      e->kind = MachineExpr::Kind::Alt;
      std::size_t n = 2 + rng.below(2);
      for (std::size_t i = 0; i < n; ++i)
        e->items.push_back(random_engine_expr(rng, depth - 1, ndefs, alt_counter));
      if (rng.below(2) == 0)
        for (std::size_t i = 0; i < n; ++i)
          e->weights.push_back(1.0 + static_cast<double>(rng.below(4)));
      e->alt_id = (*alt_counter)++;
      break;
    }
  }
  return e;
}

Grammar random_engine_grammar(Rng& rng) {
  for (;;) {
    Grammar g;
    int alts = 0;
    int ndefs = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < ndefs; ++i) {
      Definition def;
      def.name = "m" + std::to_string(i);
      def.body = random_engine_expr(rng, 2, ndefs, &alts);
      g.index[def.name] = g.defs.size();
      g.defs.push_back(std::move(def));
    }
    g.start = g.defs[rng.below(g.defs.size())].name;
    g.alt_count = alts;
    if (validate(g).empty()) return g;
  }
}

double recompute_prob(const DerivationNode& d) {
  double p = d.prob_factor;
  for (const auto& c : d.children) p *= recompute_prob(*c);
  return p;
}

void check_span_partition(const DerivationNode& d) {
  if (d.children.empty()) return;
  std::uint32_t cursor = d.span.begin;
  for (const auto& c : d.children) {
    CHECK(c->span.begin == cursor);
    cursor = c->span.end;
    check_span_partition(*c);
  }
  CHECK(cursor == d.span.end);
}

}  // namespace

TEST_CASE("random suite: memo transparency, completeness, probabilities, ranking") {
  Rng rng(777);
  int cases = 0;
  while (cases < 200) {
    Grammar g = random_engine_grammar(rng);
    std::vector<std::string> tokens;
    std::size_t len = rng.below(9);
    for (std::size_t i = 0; i < len; ++i)
      tokens.push_back(std::string(1, static_cast<char>('a' + rng.below(3))));

    EngineOptions memo_on;
    memo_on.max_ambiguity = 1 << 20;
    EngineOptions memo_off = memo_on;
    memo_off.memoize = false;

    Grammar g2 = g;  // engines each own a copy
    Engine on(std::move(g), CatalogSet{}, memo_on);
    Engine off(std::move(g2), CatalogSet{}, memo_off);

    auto ron = on.parse(tokens, 100000);
    auto roff = off.parse(tokens, 100000);

    // Memoization transparency: results and probabilities bit-identical.
    REQUIRE(ron.items.size() == roff.items.size());
    CHECK(ron.truncated == roff.truncated);
    for (std::size_t i = 0; i < ron.items.size(); ++i) {
      CHECK(ron.items[i].prob == roff.items[i].prob);
      CHECK(derivation_trace(*ron.items[i].derivation) ==
            derivation_trace(*roff.items[i].derivation));
      CHECK(linearize(ron.items[i].exr) == linearize(roff.items[i].exr));
    }

    // Completeness: result multiset equals exhaustive enumeration.
    EnumOracle oracle{on.grammar(), on.alt_probs(), tokens};
    auto want = oracle.full_span_probs();
    std::vector<double> got;
    for (const auto& item : ron.items) got.push_back(item.prob);
    std::sort(got.begin(), got.end());
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));

    // Probability factors along the derivation multiply to the reported prob.
    for (const auto& item : ron.items)
      CHECK(item.prob == doctest::Approx(recompute_prob(*item.derivation)).epsilon(1e-12));

    // Ranking is monotone; derivations span the whole input.
    for (std::size_t i = 1; i < ron.items.size(); ++i)
      CHECK(ron.items[i - 1].prob >= ron.items[i].prob);
    for (const auto& item : ron.items) {
      CHECK(item.derivation->span.begin == 0);
      CHECK(item.derivation->span.end == tokens.size());
      check_span_partition(*item.derivation);
    }
    ++cases;
  }
}

TEST_CASE("memoization is markedly faster on an exponentially ambiguous grammar") {
  // Compositions of n into parts of size 1 and 2: Fibonacci-many derivations.
  Grammar g = parse_grammar("def S = \"a\" + \"a\" * S + \"a\" * \"a\" * S");
  std::vector<std::string> tokens(16, "a");

  EngineOptions on;
  EngineOptions off;
  off.memoize = false;
  Grammar g2 = g;
  Engine memo_engine(std::move(g), CatalogSet{}, on);
  Engine plain_engine(std::move(g2), CatalogSet{}, off);

  auto time_parse = [&](const Engine& e) {
    auto begin = std::chrono::steady_clock::now();
    for (int i = 0; i < 20; ++i) e.parse(tokens, 5);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
  };
  double t_on = time_parse(memo_engine);
  double t_off = time_parse(plain_engine);
  CHECK(t_off > 5.0 * t_on);

  auto a = memo_engine.parse(tokens, 100);
  auto b = plain_engine.parse(tokens, 100);
  REQUIRE(a.items.size() == b.items.size());
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    CHECK(a.items[i].prob == b.items[i].prob);
    CHECK(derivation_trace(*a.items[i].derivation) == derivation_trace(*b.items[i].derivation));
  }
}

TEST_CASE("ambiguity cap truncates deterministically and reports it") {
  Grammar g = parse_grammar("def S = \"a\" + \"a\" * S + \"a\" * \"a\" * S");
  EngineOptions opts;
  opts.max_ambiguity = 4;
  Engine engine(std::move(g), CatalogSet{}, opts);
  std::vector<std::string> tokens(12, "a");
  auto r = engine.parse(tokens, 100);
  CHECK(r.truncated);
  CHECK(r.items.size() <= 4);
}
