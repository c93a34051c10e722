#include "sempar/catalog.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <set>

#include "sempar/errors.hpp"
#include "sempar/semtree.hpp"

namespace sempar {

Catalog::Catalog(std::string name, std::vector<CatalogEntry> entries)
    : name_(std::move(name)), entries_(std::move(entries)) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : entries_) {
    if (e.alias.empty()) throw Error("catalog " + name_ + ": empty alias");
    if (!(e.prob > 0.0 && e.prob <= 1.0))
      throw Error("catalog " + name_ + ": probability out of (0,1] for entity " + e.entity);
    std::string phrase;
    for (const auto& t : e.alias) {
      if (!phrase.empty()) phrase += ' ';
      phrase += t;
    }
    if (!seen.emplace(phrase, e.entity).second)
      throw Error("catalog " + name_ + ": duplicate (alias, entity) pair: '" + phrase + "', " +
                  e.entity);
  }
  build_index();
}

namespace {

constexpr std::uint64_t kEmptyKey = ~0ULL;
constexpr std::uint32_t kNoNode = ~0U;

std::uint64_t mix_key(std::uint64_t k) {
  k = (k ^ (k >> 30)) * 0xbf58476d1ce4e5b9ULL;
  k = (k ^ (k >> 27)) * 0x94d049bb133111ebULL;
  return k ^ (k >> 31);
}

}  // namespace

void Catalog::EdgeTable::reset(std::size_t expected) {
  std::size_t size = 16;
  while (size < expected * 2) size <<= 1;
  keys.assign(size, kEmptyKey);
  values.assign(size, 0);
  mask = size - 1;
}

void Catalog::EdgeTable::insert(std::uint64_t key, std::uint32_t value) {
  std::uint64_t slot = mix_key(key) & mask;
  while (keys[slot] != kEmptyKey) slot = (slot + 1) & mask;
  keys[slot] = key;
  values[slot] = value;
}

const std::uint32_t* Catalog::EdgeTable::find(std::uint64_t key) const {
  if (keys.empty()) return nullptr;
  std::uint64_t slot = mix_key(key) & mask;
  while (keys[slot] != kEmptyKey) {
    if (keys[slot] == key) return &values[slot];
    slot = (slot + 1) & mask;
  }
  return nullptr;
}

void Catalog::build_index() {
  token_ids_.clear();
  node_entries_.assign(1, {});  // node 0 = root
  by_entity_.clear();

  std::size_t total_tokens = 0;
  for (const auto& e : entries_) total_tokens += e.alias.size();
  edges_.reset(total_tokens + 1);
  root_edges_.clear();

  for (std::size_t i = 0; i < entries_.size(); ++i) {
    std::uint32_t node = 0;
    for (std::size_t depth = 0; depth < entries_[i].alias.size(); ++depth) {
      const auto& tok = entries_[i].alias[depth];
      auto [it, inserted] =
          token_ids_.emplace(tok, static_cast<std::uint32_t>(token_ids_.size()));
      if (inserted) root_edges_.push_back(kNoNode);
      std::uint32_t next;
      if (depth == 0) {
        if (root_edges_[it->second] == kNoNode) {
          root_edges_[it->second] = static_cast<std::uint32_t>(node_entries_.size());
          node_entries_.emplace_back();
        }
        next = root_edges_[it->second];
      } else {
        std::uint64_t key = (static_cast<std::uint64_t>(node) << 32) | it->second;
        const std::uint32_t* found = edges_.find(key);
        if (!found) {
          next = static_cast<std::uint32_t>(node_entries_.size());
          node_entries_.emplace_back();
          edges_.insert(key, next);
        } else {
          next = *found;
        }
      }
      node = next;
    }
    node_entries_[node].push_back(i);
  }
  // Matches at one node come out most-probable first.
  for (auto& list : node_entries_)
    std::stable_sort(list.begin(), list.end(), [this](std::size_t a, std::size_t b) {
      return entries_[a].prob > entries_[b].prob;
    });

  for (std::size_t i = 0; i < entries_.size(); ++i)
    by_entity_[entries_[i].entity].emplace_back(i, entries_[i].prob);
  for (auto& [entity, aliases] : by_entity_) {
    double total = 0;
    for (auto& [idx, w] : aliases) total += w;
    for (auto& [idx, w] : aliases) w /= total;
  }
}

Catalog Catalog::from_tsv(std::string name, std::istream& in, bool lowercase) {
  std::vector<CatalogEntry> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    for (;;) {
      std::size_t tab = line.find('\t', pos);
      cols.push_back(line.substr(pos, tab == std::string::npos ? tab : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (cols.size() != 3)
      throw CatalogFormatError("expected 3 tab-separated columns, got " +
                                   std::to_string(cols.size()),
                               lineno);
    CatalogEntry e;
    e.alias = tokenize(cols[0], lowercase);
    if (e.alias.empty()) throw CatalogFormatError("empty alias phrase", lineno);
    e.entity = cols[1];
    if (e.entity.empty()) throw CatalogFormatError("empty entity id", lineno);
    char* endp = nullptr;
    e.prob = std::strtod(cols[2].c_str(), &endp);
    if (endp == cols[2].c_str() || *endp != '\0')
      throw CatalogFormatError("malformed probability '" + cols[2] + "'", lineno);
    if (!(e.prob > 0.0 && e.prob <= 1.0))
      throw CatalogFormatError("probability " + cols[2] + " outside (0,1]", lineno);
    entries.push_back(std::move(e));
  }
  return Catalog(std::move(name), std::move(entries));
}

Catalog Catalog::load(const std::string& path, bool lowercase) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open catalog file: " + path);
  std::string stem = std::filesystem::path(path).stem().string();
  return from_tsv(stem, in, lowercase);
}

std::vector<CatalogMatch> Catalog::lookup(std::span<const std::string> tokens,
                                          std::size_t start) const {
  std::vector<CatalogMatch> out;
  std::uint32_t node = 0;
  for (std::size_t i = start; i < tokens.size(); ++i) {
    auto tid = token_ids_.find(tokens[i]);
    if (tid == token_ids_.end()) break;
    if (i == start) {
      node = root_edges_[tid->second];
      if (node == kNoNode) break;
    } else {
      std::uint64_t key = (static_cast<std::uint64_t>(node) << 32) | tid->second;
      const std::uint32_t* edge = edges_.find(key);
      if (!edge) break;
      node = *edge;
    }
    for (std::size_t entry : node_entries_[node])
      out.push_back({i + 1, entries_[entry].entity, entries_[entry].prob});
  }
  // Longest match first, then most probable (per-node lists are presorted).
  std::stable_sort(out.begin(), out.end(),
                   [](const CatalogMatch& a, const CatalogMatch& b) { return a.end > b.end; });
  return out;
}

std::vector<CatalogMatch> Catalog::lookup_scan(std::span<const std::string> tokens,
                                               std::size_t start) const {
  std::vector<CatalogMatch> out;
  for (const auto& e : entries_) {
    if (e.alias.size() > tokens.size() - start) continue;
    bool match = true;
    for (std::size_t i = 0; i < e.alias.size(); ++i)
      if (e.alias[i] != tokens[start + i]) { match = false; break; }
    if (match) out.push_back({start + e.alias.size(), e.entity, e.prob});
  }
  std::stable_sort(out.begin(), out.end(), [](const CatalogMatch& a, const CatalogMatch& b) {
    if (a.end != b.end) return a.end > b.end;
    return a.prob > b.prob;
  });
  return out;
}

CatalogStats Catalog::stats() const {
  CatalogStats s;
  s.unique_entities = by_entity_.size();
  if (s.unique_entities)
    s.avg_aliases_per_entity =
        static_cast<double>(entries_.size()) / static_cast<double>(s.unique_entities);
  return s;
}

void Catalog::extend(const std::vector<CatalogEntry>& extra) {
  std::map<std::pair<std::string, std::string>, double> existing;
  auto phrase_of = [](const CatalogEntry& e) {
    std::string phrase;
    for (const auto& t : e.alias) {
      if (!phrase.empty()) phrase += ' ';
      phrase += t;
    }
    return phrase;
  };
  for (const auto& e : entries_) existing[{phrase_of(e), e.entity}] = e.prob;
  for (const auto& e : extra) {
    if (e.alias.empty()) throw Error("catalog " + name_ + ": empty alias in extension");
    if (!(e.prob > 0.0 && e.prob <= 1.0))
      throw Error("catalog " + name_ + ": probability out of (0,1] in extension");
    auto key = std::make_pair(phrase_of(e), e.entity);
    auto it = existing.find(key);
    if (it != existing.end()) {
      if (it->second != e.prob)
        throw Error("catalog " + name_ + ": conflicting probability for alias '" + key.first +
                    "' of " + e.entity);
      continue;
    }
    existing[key] = e.prob;
    entries_.push_back(e);
  }
  build_index();
}

void CatalogSet::add(Catalog catalog) {
  std::string name = catalog.name();
  catalogs_.insert_or_assign(std::move(name), std::move(catalog));
}

const Catalog* CatalogSet::find(std::string_view name) const {
  auto it = catalogs_.find(name);
  return it == catalogs_.end() ? nullptr : &it->second;
}

std::vector<std::string> CatalogSet::names() const {
  std::vector<std::string> out;
  for (const auto& [name, cat] : catalogs_) out.push_back(name);
  return out;
}

CatalogSet CatalogSet::load_dir(const std::string& dir, bool lowercase) {
  CatalogSet set;
  if (!std::filesystem::is_directory(dir)) throw Error("not a catalog directory: " + dir);
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".tsv")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) set.add(Catalog::load(f.string(), lowercase));
  return set;
}

void CatalogSet::extend(const std::string& catalog_name, const std::vector<CatalogEntry>& extra) {
  auto it = catalogs_.find(catalog_name);
  if (it == catalogs_.end()) {
    add(Catalog(catalog_name, extra));
    return;
  }
  it->second.extend(extra);
}

}  // namespace sempar
