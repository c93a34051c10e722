#pragma once

#include <doctest.h>

#include <string>
#include <vector>

#include "sempar/rng.hpp"
#include "sempar/semtree.hpp"

namespace testutil {

using sempar::Rng;
using sempar::SemTree;
using sempar::SemTreePtr;

inline const std::string kWorkedExr =
    "(ORDER (PIZZAORDER (NUMBER 1) (SIZE MEDIUM) (TOPPING PEPPERS) (TOPPING HAM) "
    "(NOT (TOPPING ONIONS))))";

inline const std::string kWorkedTop =
    "(ORDER (PIZZAORDER (NUMBER one) (SIZE medium-size) pizza with (TOPPING peppers) "
    "and (TOPPING ham) but no (NOT (TOPPING onions))))";

inline const std::string kWorkedUtterance =
    "one medium-size pizza with peppers and ham but no onions";

// Two-intent worked example shared by the label-codec tests.
inline const std::string kPipelineTopText =
    "(ORDER (PIZZAORDER (NUMBER two) (SIZE large) pizzas with (TOPPING ham)) and "
    "(DRINKORDER (NUMBER one) (DRINKTYPE diet coke)))";

/// Random EXR tree: constructor names from a small pool, literal leaves.
inline SemTreePtr random_exr(Rng& rng, int max_depth = 4) {
  static const char* names[] = {"ORDER",   "PIZZAORDER", "DRINKORDER", "TOPPING",
                                "NUMBER",  "SIZE",       "NOT",        "STYLE",
                                "VOLUME",  "QUANTITY"};
  static const char* entities[] = {"HAM", "PEPPERS", "ONIONS", "MEDIUM", "LARGE", "COKE"};
  if (max_depth <= 0 || rng.below(4) == 0) {
    if (rng.below(2) == 0) return SemTree::entity(entities[rng.below(6)]);
    return SemTree::integer(static_cast<std::int64_t>(rng.below(10)));
  }
  std::size_t n = 1 + rng.below(4);
  std::vector<SemTreePtr> kids;
  for (std::size_t i = 0; i < n; ++i) kids.push_back(random_exr(rng, max_depth - 1));
  return SemTree::make(names[rng.below(10)], std::move(kids));
}

/// Mutates exactly one leaf (literal value changed).
inline SemTreePtr mutate_one_leaf(const SemTreePtr& tree) {
  if (!tree->is_constructor()) {
    if (tree->is_literal() && std::holds_alternative<std::int64_t>(tree->literal()))
      return SemTree::integer(std::get<std::int64_t>(tree->literal()) + 1);
    return SemTree::entity("MUTATED_LEAF_XYZ");
  }
  auto kids = tree->children();
  kids[0] = mutate_one_leaf(kids[0]);
  return SemTree::make(tree->name(), std::move(kids));
}

}  // namespace testutil
