#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sempar {

/// One catalog row: an alias phrase naming an entity with a weight in (0,1].
struct CatalogEntry {
  std::vector<std::string> alias;
  std::string entity;
  double prob = 1.0;
};

struct CatalogMatch {
  std::size_t end = 0;  // exclusive token index
  std::string entity;
  double prob = 1.0;
};

struct CatalogStats {
  std::size_t unique_entities = 0;
  double avg_aliases_per_entity = 0.0;
};

/// Alias-phrase -> (entity, prob) table with a token-trie index so prefix
/// lookups cost O(match length), independent of catalog size. Immutable
/// while being queried; concurrent lookups are safe.
class Catalog {
 public:
  Catalog() = default;
  Catalog(std::string name, std::vector<CatalogEntry> entries);

  /// Loads a three-column TSV (alias phrase, entity id, probability).
  /// The catalog name is the file stem. Alias phrases are tokenized on
  /// whitespace and lowercased when `lowercase` is set.
  static Catalog load(const std::string& path, bool lowercase = true);
  static Catalog from_tsv(std::string name, std::istream& in, bool lowercase = true);

  /// All aliases matching tokens[start..end) for some end, ordered by
  /// descending end then descending prob. No match gives an empty list.
  std::vector<CatalogMatch> lookup(std::span<const std::string> tokens, std::size_t start) const;

  /// Same contract as lookup, by linear scan over all entries. Test oracle.
  std::vector<CatalogMatch> lookup_scan(std::span<const std::string> tokens,
                                        std::size_t start) const;

  CatalogStats stats() const;

  const std::string& name() const { return name_; }
  const std::vector<CatalogEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// Entries grouped by entity with per-entity normalized alias weights,
  /// for sampling surface forms.
  const std::map<std::string, std::vector<std::pair<std::size_t, double>>>& by_entity() const {
    return by_entity_;
  }

  /// Adds entries; a duplicate (alias, entity) pair with equal prob is
  /// ignored, with a conflicting prob it is an error.
  void extend(const std::vector<CatalogEntry>& extra);

 private:
  void build_index();

  // Open-addressed edge table: key = (node << 32 | token id). Flat storage
  // keeps a lookup at one or two cache lines per consumed token, so cost
  // scales with match length rather than catalog size.
  struct EdgeTable {
    std::vector<std::uint64_t> keys;
    std::vector<std::uint32_t> values;
    std::uint64_t mask = 0;
    void reset(std::size_t expected);
    void insert(std::uint64_t key, std::uint32_t value);
    const std::uint32_t* find(std::uint64_t key) const;
  };

  std::string name_;
  std::vector<CatalogEntry> entries_;
  std::unordered_map<std::string, std::uint32_t> token_ids_;
  std::vector<std::uint32_t> root_edges_;               // token id -> depth-1 node
  EdgeTable edges_;                                     // deeper transitions
  std::vector<std::vector<std::size_t>> node_entries_;  // node -> complete aliases
  std::map<std::string, std::vector<std::pair<std::size_t, double>>> by_entity_;
};

/// Named collection of catalogs (typically one per slot constructor).
class CatalogSet {
 public:
  CatalogSet() = default;

  /// Loads every .tsv file in a directory.
  static CatalogSet load_dir(const std::string& dir, bool lowercase = true);

  void add(Catalog catalog);
  const Catalog* find(std::string_view name) const;
  std::vector<std::string> names() const;
  bool empty() const { return catalogs_.empty(); }

  /// Merges extra entries into the named catalog, creating it if missing
  /// (the "all entities" resolution study workflow).
  void extend(const std::string& catalog_name, const std::vector<CatalogEntry>& extra);

 private:
  std::map<std::string, Catalog, std::less<>> catalogs_;
};

}  // namespace sempar
