#include "sempar/resolver.hpp"

#include <json.hpp>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <optional>

#include "sempar/errors.hpp"

namespace sempar {

ResolverConfig ResolverConfig::pizza_defaults() {
  ResolverConfig c;
  for (const char* slot : {"NUMBER", "SIZE", "TOPPING", "STYLE", "QUANTITY", "DRINKTYPE",
                           "VOLUME", "CONTAINERTYPE"})
    c.slot_to_catalog[slot] = slot;
  c.default_slots.emplace_back("PIZZAORDER", parse_linearized("(NUMBER 1)"));
  c.default_slots.emplace_back("DRINKORDER", parse_linearized("(NUMBER 1)"));
  return c;
}

ResolverConfig ResolverConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open resolver config: " + path);
  nlohmann::json j;
  in >> j;
  ResolverConfig c;
  if (j.contains("slot_to_catalog"))
    for (const auto& [slot, cat] : j["slot_to_catalog"].items())
      c.slot_to_catalog[slot] = cat.get<std::string>();
  if (j.contains("default_slots"))
    for (const auto& pair : j["default_slots"])
      c.default_slots.emplace_back(pair.at(0).get<std::string>(),
                                   parse_linearized(pair.at(1).get<std::string>()));
  if (j.contains("passthrough"))
    for (const auto& name : j["passthrough"]) c.passthrough.insert(name.get<std::string>());
  if (j.contains("miss_policy")) {
    std::string p = j["miss_policy"].get<std::string>();
    if (p == "fail") c.miss_policy = MissPolicy::Fail;
    else if (p == "drop") c.miss_policy = MissPolicy::DropSlot;
    else if (p == "keep-surface") c.miss_policy = MissPolicy::KeepSurface;
    else throw Error("unknown miss_policy '" + p + "'");
  }
  return c;
}

namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

std::vector<SemTreePtr> entity_leaves(const std::string& entity) {
  // Volume-style ids may hold several space-separated symbols ("2 LITER").
  std::vector<SemTreePtr> leaves;
  for (const auto& word : tokenize(entity)) {
    if (all_digits(word))
      leaves.push_back(SemTree::integer(std::strtoll(word.c_str(), nullptr, 10)));
    else
      leaves.push_back(SemTree::entity(word));
  }
  if (leaves.empty()) throw Error("empty entity id");
  return leaves;
}

struct Resolver {
  const CatalogSet& catalogs;
  const ResolverConfig& config;
  std::vector<ResolveNote>* notes;

  void note(std::string slot, std::string phrase, std::string message) {
    if (notes) notes->push_back({std::move(slot), std::move(phrase), std::move(message)});
  }

  // nullopt = this slot still has its literal form (nothing to resolve).
  std::optional<SemTreePtr> resolve_slot(const SemTree& node) {
    bool any_token = false;
    for (const auto& c : node.children())
      if (c->is_token()) any_token = true;
    if (!any_token) return std::nullopt;

    std::vector<std::string> tokens;
    std::string phrase;
    for (const auto& c : node.children()) {
      if (!c->is_token()) continue;
      tokens.push_back(c->token_text());
      if (!phrase.empty()) phrase += ' ';
      phrase += c->token_text();
    }

    auto mapping = config.slot_to_catalog.find(node.name());
    if (mapping == config.slot_to_catalog.end())
      throw Error("no catalog mapped for slot constructor " + node.name() +
                  " (map it or list it as pass-through)");
    const Catalog* cat = catalogs.find(mapping->second);
    if (!cat) throw Error("catalog '" + mapping->second + "' not loaded");

    // The slot phrase must be one whole alias; upstream already segmented.
    std::optional<CatalogMatch> best;
    bool tie = false;
    for (const auto& m : cat->lookup(tokens, 0)) {
      if (m.end != tokens.size()) continue;
      if (!best || m.prob > best->prob) {
        best = m;
        tie = false;
      } else if (m.prob == best->prob && m.entity != best->entity) {
        tie = true;
        if (m.entity < best->entity) best = m;
      }
    }
    if (!best) {
      switch (config.miss_policy) {
        case ResolverConfig::MissPolicy::Fail:
          throw Error("cannot resolve '" + phrase + "' in slot " + node.name());
        case ResolverConfig::MissPolicy::DropSlot:
          note(node.name(), phrase, "dropped unresolvable slot");
          return SemTreePtr{};  // empty ptr = drop
        case ResolverConfig::MissPolicy::KeepSurface:
          note(node.name(), phrase, "kept surface form");
          return SemTree::make(node.name(), {SemTree::resolved_string(phrase)});
      }
    }
    if (tie) note(node.name(), phrase, "probability tie; chose " + best->entity);
    return SemTree::make(node.name(), entity_leaves(best->entity));
  }

  // Empty ptr = node entirely discarded.
  SemTreePtr walk(const SemTreePtr& node) {
    if (node->is_token()) return {};  // carrier token outside any slot
    if (node->is_literal()) return node;
    if (is_leaf_slot(*node) && !config.passthrough.count(node->name())) {
      auto resolved = resolve_slot(*node);
      if (resolved) return *resolved;  // may be empty (dropped)
      // Already-resolved slot: keep verbatim so resolution is idempotent.
      return node;
    }

    std::vector<SemTreePtr> kids;
    for (const auto& c : node->children()) {
      SemTreePtr r = walk(c);
      if (r) kids.push_back(std::move(r));
    }
    for (const auto& [intent, sub] : config.default_slots) {
      if (node->name() != intent) continue;
      bool present = false;
      for (const auto& k : kids)
        if (k->is_constructor() && k->name() == sub->name()) present = true;
      if (!present) kids.insert(kids.begin(), sub);
    }
    if (kids.empty()) return {};
    return SemTree::make(node->name(), std::move(kids));
  }
};

}  // namespace

SemTreePtr resolve(const SemTreePtr& tree, const CatalogSet& catalogs,
                   const ResolverConfig& config, std::vector<ResolveNote>* notes) {
  if (!tree->is_constructor()) throw Error("resolve: input is not a constructor tree");
  Resolver r{catalogs, config, notes};
  SemTreePtr out = r.walk(tree);
  if (!out) throw Error("resolution discarded the entire tree");
  return out;
}

std::map<std::string, std::vector<CatalogEntry>> load_extra_entities(const std::string& path,
                                                                     bool lowercase) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open extra-entities file: " + path);
  std::map<std::string, std::vector<CatalogEntry>> out;
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
    if (cols.size() != 4)
      throw CatalogFormatError("expected 4 tab-separated columns (catalog, alias, entity, prob)",
                               lineno);
    CatalogEntry e;
    e.alias = tokenize(cols[1], lowercase);
    e.entity = cols[2];
    char* endp = nullptr;
    e.prob = std::strtod(cols[3].c_str(), &endp);
    if (endp == cols[3].c_str() || *endp != '\0' || !(e.prob > 0.0 && e.prob <= 1.0))
      throw CatalogFormatError("bad probability '" + cols[3] + "'", lineno);
    if (e.alias.empty()) throw CatalogFormatError("empty alias", lineno);
    out[cols[0]].push_back(std::move(e));
  }
  return out;
}

CatalogSet extend_catalogs(const CatalogSet& catalogs,
                           const std::map<std::string, std::vector<CatalogEntry>>& extra) {
  CatalogSet out = catalogs;
  for (const auto& [name, entries] : extra) out.extend(name, entries);
  return out;
}

}  // namespace sempar
