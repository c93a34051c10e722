#include <doctest.h>

#include "helpers.hpp"
#include "sempar/errors.hpp"
#include "sempar/semtree.hpp"

using namespace sempar;
using namespace testutil;

TEST_CASE("tokenize splits on whitespace runs") {
  CHECK(tokenize("two large pizzas") == std::vector<std::string>{"two", "large", "pizzas"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("  a  b ") == std::vector<std::string>{"a", "b"});
  CHECK(tokenize("I'd LIKE", true) == std::vector<std::string>{"i'd", "like"});
  CHECK(tokenize("jalape\xc3\xb1o", true) == std::vector<std::string>{"jalape\xc3\xb1o"});
}

TEST_CASE("parse_linearized classifies leaves") {
  auto number = parse_linearized("(NUMBER 2)");
  REQUIRE(number->is_constructor());
  CHECK(number->name() == "NUMBER");
  REQUIRE(number->children().size() == 1);
  CHECK(std::get<std::int64_t>(number->children()[0]->literal()) == 2);

  auto topping = parse_linearized("(TOPPING peppers)");
  REQUIRE(topping->children().size() == 1);
  CHECK(topping->children()[0]->is_token());
  CHECK(topping->children()[0]->token_text() == "peppers");

  auto size = parse_linearized("(SIZE MEDIUM)");
  CHECK(std::get<SemTree::Entity>(size->children()[0]->literal()).id == "MEDIUM");
}

TEST_CASE("parse_linearized reports malformed input with offsets") {
  CHECK_THROWS_AS(parse_linearized("(A (B"), TreeSyntaxError);
  try {
    parse_linearized("(A (B");
  } catch (const TreeSyntaxError& e) {
    CHECK(e.offset == 5);
  }
  CHECK_THROWS_AS(parse_linearized("()"), TreeSyntaxError);
  CHECK_THROWS_AS(parse_linearized("(A x) trailing"), TreeSyntaxError);
  CHECK_THROWS_AS(parse_linearized(""), TreeSyntaxError);
  CHECK_THROWS_AS(parse_linearized("(lowercase x)"), TreeSyntaxError);
}

TEST_CASE("linearize natural order round-trips the worked trees") {
  auto tree = parse_linearized(kWorkedExr);
  CHECK(linearize(tree) == kWorkedExr);
  auto top = parse_linearized(kWorkedTop);
  CHECK(linearize(top) == kWorkedTop);
}

TEST_CASE("sorted linearization orders siblings lexicographically") {
  auto tree = parse_linearized(
      "(ORDER (PIZZAORDER (NUMBER 2) (NOT (TOPPING CHEESE))) "
      "(DRINKORDER (CONTAINERTYPE BOTTLE) (DRINKTYPE SEVEN_UP)))");
  // Table-style expectations: D before P, NOT before NUMBER.
  CHECK(linearize(tree, OrderingPolicy::sorted()) ==
        "(ORDER (DRINKORDER (CONTAINERTYPE BOTTLE) (DRINKTYPE SEVEN_UP)) "
        "(PIZZAORDER (NOT (TOPPING CHEESE)) (NUMBER 2)))");
}

TEST_CASE("canonicalize sorts children and is idempotent") {
  auto tree = parse_linearized("(ORDER (PIZZAORDER (NUMBER 1)) (DRINKORDER (NUMBER 2)))");
  auto canon = canonicalize(tree);
  CHECK(canon->children()[0]->name() == "DRINKORDER");

  auto leaf = SemTree::entity("HAM");
  CHECK(*canonicalize(leaf) == *leaf);

  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    auto t = random_exr(rng);
    auto once = canonicalize(t);
    CHECK(*canonicalize(once) == *once);
  }
}

TEST_CASE("unordered_equal is order-insensitive equality") {
  auto natural = parse_linearized(
      "(ORDER (PIZZAORDER (NUMBER 2) (NOT (TOPPING CHEESE))) "
      "(DRINKORDER (CONTAINERTYPE BOTTLE) (DRINKTYPE SEVEN_UP)))");
  auto permuted = parse_linearized(
      "(ORDER (DRINKORDER (DRINKTYPE SEVEN_UP) (CONTAINERTYPE BOTTLE)) "
      "(PIZZAORDER (NUMBER 2) (NOT (TOPPING CHEESE))))");
  CHECK(unordered_equal(natural, permuted));

  auto fig2a = parse_linearized(kWorkedExr);
  CHECK(unordered_equal(fig2a, fig2a));
  auto smaller = parse_linearized(
      "(ORDER (PIZZAORDER (NUMBER 1) (SIZE MEDIUM) (TOPPING PEPPERS) "
      "(NOT (TOPPING ONIONS))))");
  CHECK_FALSE(unordered_equal(fig2a, smaller));
}

TEST_CASE("decouple prunes carrier tokens only") {
  auto top = parse_linearized(kWorkedTop);
  auto expected = parse_linearized(
      "(ORDER (PIZZAORDER (NUMBER one) (SIZE medium-size) (TOPPING peppers) "
      "(TOPPING ham) (NOT (TOPPING onions))))");
  CHECK(*decouple(top) == *expected);
  // Idempotent: already-decoupled trees are fixpoints.
  CHECK(*decouple(decouple(top)) == *decouple(top));

  auto pipeline_top = parse_linearized(kPipelineTopText);
  auto dec = decouple(pipeline_top);
  auto toks = leaf_tokens(*dec);
  CHECK(toks == std::vector<std::string>{"two", "large", "ham", "one", "diet", "coke"});

  // A literal mixed under a non-slot node cannot come from a TOP tree.
  auto not_top = parse_linearized("(ORDER (PIZZAORDER (NUMBER 1) HAM hello))");
  CHECK_THROWS_AS(decouple(not_top), Error);
}

TEST_CASE("full TOP leaf traversal reconstructs the utterance") {
  auto top = parse_linearized(kWorkedTop);
  CHECK(leaf_tokens(*top) == tokenize(kWorkedUtterance));
}

TEST_CASE("reorder permutes while preserving unordered equality") {
  auto tree = parse_linearized(kWorkedExr);
  CHECK(*reorder(tree, OrderingPolicy::natural()) == *tree);
  auto r1 = reorder(tree, OrderingPolicy::random(7));
  auto r2 = reorder(tree, OrderingPolicy::random(7));
  CHECK(*r1 == *r2);
  CHECK(unordered_equal(tree, r1));

  auto top = parse_linearized(kWorkedTop);
  CHECK_THROWS_AS(reorder(top, OrderingPolicy::random(1)), Error);

  Rng rng(99);
  int permuted_differently = 0;
  for (int i = 0; i < 2000; ++i) {
    auto t = random_exr(rng);
    OrderingPolicy policy = OrderingPolicy::random(rng.next_u64());
    auto r = reorder(t, policy);
    CHECK(unordered_equal(t, r));
    if (!(*r == *t)) ++permuted_differently;
    CHECK_FALSE(unordered_equal(t, mutate_one_leaf(t)));
  }
  CHECK(permuted_differently > 0);
}

TEST_CASE("linearize/parse round-trip is bit-exact") {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    auto t = random_exr(rng);
    if (!t->is_constructor()) continue;
    auto text = linearize(t);
    CHECK(linearize(parse_linearized(text)) == text);
  }
}

TEST_CASE("resolved strings linearize quoted and round-trip") {
  auto t = SemTree::make("TOPPING", {SemTree::resolved_string("odd \"phrase\"")});
  auto text = linearize(t);
  auto back = parse_linearized(text);
  CHECK(*back == *t);
}
