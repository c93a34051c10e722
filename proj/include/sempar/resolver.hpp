#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sempar/catalog.hpp"
#include "sempar/semtree.hpp"

namespace sempar {

/// Rule-based entity resolution: TOP or TOP-Decoupled in, EXR out.
struct ResolverConfig {
  enum class MissPolicy { Fail, DropSlot, KeepSurface };

  std::map<std::string, std::string> slot_to_catalog;
  // (intent constructor, default subtree) inserted when the intent lacks a
  // child with the subtree's root constructor.
  std::vector<std::pair<std::string, SemTreePtr>> default_slots;
  MissPolicy miss_policy = MissPolicy::Fail;
  std::set<std::string> passthrough;  // leaf slots left untouched

  /// Identity slot->catalog mapping for the pizza domain plus the default
  /// (NUMBER 1) insertion on PIZZAORDER and DRINKORDER.
  static ResolverConfig pizza_defaults();

  /// JSON config: {"slot_to_catalog": {...}, "default_slots": [[intent,
  /// "(NUMBER 1)"], ...], "miss_policy": "fail"|"drop"|"keep-surface",
  /// "passthrough": [...]}.
  static ResolverConfig load(const std::string& path);
};

struct ResolveNote {
  std::string slot;
  std::string phrase;
  std::string message;
};

/// Replaces each leaf slot's token phrase by its highest-probability catalog
/// entity (full-phrase match), discards tokens outside leaf slots, and
/// inserts missing default slots. Ties between equal-probability entities go
/// to the lexicographically smallest id and are logged to `notes`.
SemTreePtr resolve(const SemTreePtr& tree, const CatalogSet& catalogs,
                   const ResolverConfig& config, std::vector<ResolveNote>* notes = nullptr);

/// Four-column TSV (catalog, alias phrase, entity, prob) with extra entries
/// to merge into a catalog set, e.g. test-only entities for the perfect-ER
/// study.
std::map<std::string, std::vector<CatalogEntry>> load_extra_entities(const std::string& path,
                                                                     bool lowercase = true);

/// Returns a copy of `catalogs` with the extra entries merged in.
CatalogSet extend_catalogs(const CatalogSet& catalogs,
                           const std::map<std::string, std::vector<CatalogEntry>>& extra);

}  // namespace sempar
