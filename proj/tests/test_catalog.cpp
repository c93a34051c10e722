#include <doctest.h>

#include <chrono>
#include <sstream>

#include "helpers.hpp"
#include "sempar/catalog.hpp"
#include "sempar/errors.hpp"

using namespace sempar;
using testutil::Rng;

namespace {

Catalog ricotta_catalog() {
  std::istringstream in(
      "ricotta\tRICOTTA_CHEESE\t0.5\n"
      "ricotta cheese\tRICOTTA_CHEESE\t0.5\n");
  return Catalog::from_tsv("TOPPING", in);
}

}  // namespace

TEST_CASE("two aliases of one entity load from TSV") {
  Catalog cat = ricotta_catalog();
  CHECK(cat.entries().size() == 2);
  auto s = cat.stats();
  CHECK(s.unique_entities == 1);
  CHECK(s.avg_aliases_per_entity == doctest::Approx(2.0));
}

TEST_CASE("empty file loads an empty catalog") {
  std::istringstream in("");
  Catalog cat = Catalog::from_tsv("EMPTY", in);
  CHECK(cat.empty());
  CHECK(cat.stats().unique_entities == 0);
}

TEST_CASE("malformed lines are rejected with line numbers") {
  {
    std::istringstream in("ricotta\tRICOTTA_CHEESE\t0.5\nham\tHAM\t1.5\n");
    try {
      Catalog::from_tsv("TOPPING", in);
      FAIL("expected CatalogFormatError");
    } catch (const CatalogFormatError& e) {
      CHECK(e.line == 2);
    }
  }
  {
    std::istringstream in("only two\tcolumns\n");
    CHECK_THROWS_AS(Catalog::from_tsv("X", in), CatalogFormatError);
  }
  {
    std::istringstream in("ham\tHAM\tnope\n");
    CHECK_THROWS_AS(Catalog::from_tsv("X", in), CatalogFormatError);
  }
  {
    std::istringstream in("ham\tHAM\t0.5\nham\tHAM\t0.5\n");
    CHECK_THROWS_AS(Catalog::from_tsv("X", in), Error);
  }
}

TEST_CASE("lookup returns all prefix matches, longest then most probable") {
  Catalog cat = ricotta_catalog();
  std::vector<std::string> tokens = {"ricotta", "cheese", "pizza"};
  auto matches = cat.lookup(tokens, 0);
  REQUIRE(matches.size() == 2);
  CHECK(matches[0].end == 2);
  CHECK(matches[0].entity == "RICOTTA_CHEESE");
  CHECK(matches[0].prob == doctest::Approx(0.5));
  CHECK(matches[1].end == 1);

  CHECK(cat.lookup(tokens, 2).empty());
}

TEST_CASE("trie lookup equals brute-force scan on random catalogs") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<CatalogEntry> entries;
    std::size_t n = 1 + rng.below(60);
    for (std::size_t i = 0; i < n; ++i) {
      CatalogEntry e;
      std::size_t len = 1 + rng.below(3);
      for (std::size_t j = 0; j < len; ++j)
        e.alias.push_back("w" + std::to_string(rng.below(8)));
      e.entity = "E" + std::to_string(i);  // unique entity per row avoids dup pairs
      e.prob = 0.1 + 0.1 * static_cast<double>(rng.below(9));
      entries.push_back(std::move(e));
    }
    Catalog cat("RAND", entries);
    for (int q = 0; q < 50; ++q) {
      std::vector<std::string> tokens;
      std::size_t len = 1 + rng.below(6);
      for (std::size_t j = 0; j < len; ++j)
        tokens.push_back("w" + std::to_string(rng.below(8)));
      std::size_t start = rng.below(len);
      auto a = cat.lookup(tokens, start);
      auto b = cat.lookup_scan(tokens, start);
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].end == b[k].end);
        CHECK(a[k].entity == b[k].entity);
        CHECK(a[k].prob == b[k].prob);
      }
    }
  }
}

TEST_CASE("single-entry catalog stats") {
  std::istringstream in("ham\tHAM\t1.0\n");
  Catalog cat = Catalog::from_tsv("X", in);
  auto s = cat.stats();
  CHECK(s.unique_entities == 1);
  CHECK(s.avg_aliases_per_entity == doctest::Approx(1.0));
}

TEST_CASE("extend merges, dedupes, and rejects conflicts") {
  Catalog cat = ricotta_catalog();
  cat.extend({{{"ham"}, "HAM", 1.0}});
  CHECK(cat.entries().size() == 3);
  std::vector<std::string> t = {"ham"};
  CHECK(cat.lookup(t, 0).size() == 1);

  cat.extend({{{"ricotta"}, "RICOTTA_CHEESE", 0.5}});  // exact duplicate: no-op
  CHECK(cat.entries().size() == 3);

  CHECK_THROWS_AS(cat.extend({{{"ricotta"}, "RICOTTA_CHEESE", 0.9}}), Error);
}

TEST_CASE("non-ascii alias bytes survive load and lookup") {
  std::istringstream in("jalape\xc3\xb1o\tJALAPENO_PEPPERS\t0.5\n");
  Catalog cat = Catalog::from_tsv("TOPPING", in);
  std::vector<std::string> t = {"jalape\xc3\xb1o"};
  auto m = cat.lookup(t, 0);
  REQUIRE(m.size() == 1);
  CHECK(m[0].entity == "JALAPENO_PEPPERS");
}

TEST_CASE("lookup cost tracks match length, not catalog size") {
  auto make = [](int vocab) {
    std::vector<CatalogEntry> entries;
    for (int i = 0; i < vocab; ++i)
      for (int j = 0; j < vocab; ++j)
        entries.push_back({{"w" + std::to_string(i), "w" + std::to_string(j)},
                           "E" + std::to_string(i) + "_" + std::to_string(j), 0.5});
    return Catalog("C", std::move(entries));
  };
  Catalog small = make(100);   // 10^4 entries
  Catalog large = make(1000);  // 10^6 entries

  Rng rng(8);
  std::vector<std::vector<std::string>> queries;
  for (int q = 0; q < 20000; ++q) {
    std::vector<std::string> toks;
    for (int t = 0; t < 3; ++t) toks.push_back("w" + std::to_string(rng.below(100)));
    queries.push_back(std::move(toks));
  }
  auto bench = [&](const Catalog& cat) {
    double best = 1e9;
    for (int rep = 0; rep < 5; ++rep) {
      auto begin = std::chrono::steady_clock::now();
      std::size_t sink = 0;
      for (const auto& q : queries) sink += cat.lookup(q, 0).size();
      double took =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
      CHECK(sink > 0);
      best = std::min(best, took);
    }
    return best;
  };
  double t_small = bench(small);
  double t_large = bench(large);
  CAPTURE(t_small);
  CAPTURE(t_large);
  CHECK(t_large < 3.0 * t_small);
}
