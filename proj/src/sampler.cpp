#include "sempar/sampler.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>

#include "sempar/errors.hpp"
#include "sempar/parallel.hpp"
#include "sempar/rng.hpp"

namespace sempar {

namespace {

// ---------------------------------------------------------------------------
// Reject filters

void collect_toppings(const SemTree& node, bool negated, std::set<std::string>& affirmed,
                      std::set<std::string>& denied) {
  if (!node.is_constructor()) return;
  if (node.name() == "TOPPING" && is_leaf_slot(node)) {
    for (const auto& c : node.children()) {
      if (!c->is_literal()) continue;
      if (const auto* e = std::get_if<SemTree::Entity>(&c->literal()))
        (negated ? denied : affirmed).insert(e->id);
    }
    return;
  }
  bool neg = negated || node.name() == "NOT";
  for (const auto& c : node.children()) collect_toppings(*c, neg, affirmed, denied);
}

// An order that both requests and refuses the same topping is pathological.
bool topping_conflict(const Sample& s) {
  std::set<std::string> affirmed, denied;
  collect_toppings(*s.exr, false, affirmed, denied);
  for (const auto& t : denied)
    if (affirmed.count(t)) return true;
  return false;
}

using FilterFn = bool (*)(const Sample&);

const std::map<std::string, FilterFn>& filter_registry() {
  static const std::map<std::string, FilterFn> registry = {
      {"topping-conflict", topping_conflict},
  };
  return registry;
}

// ---------------------------------------------------------------------------
// One sampling attempt

struct RejectAttempt {
  const char* reason;
};

struct Drawer {
  const Engine& engine;
  const SampleConstraints& cons;
  Rng& rng;
  std::vector<std::string> tokens;
  int depth = 0;

  DerivPtr draw_machine(const std::string& name, const MachineExpr* ref_site) {
    if (++depth > cons.max_depth) throw RejectAttempt{"max_depth"};
    const Definition* def = engine.grammar().find(name);
    if (!def) throw Error("sampler: unknown machine '" + name + "'");
    auto node = std::make_shared<DerivationNode>();
    node->kind = DerivationNode::Kind::Machine;
    node->name = name;
    node->expr = ref_site;
    node->span.begin = static_cast<std::uint32_t>(tokens.size());
    node->children = {draw_expr(*def->body)};
    node->span.end = static_cast<std::uint32_t>(tokens.size());
    --depth;
    return node;
  }

  DerivPtr draw_expr(const MachineExpr& e) {
    auto node = std::make_shared<DerivationNode>();
    node->span.begin = static_cast<std::uint32_t>(tokens.size());
    switch (e.kind) {
      case MachineExpr::Kind::Epsilon:
        node->kind = DerivationNode::Kind::Epsilon;
        break;
      case MachineExpr::Kind::Action:
        node->kind = DerivationNode::Kind::Action;
        node->expr = &e;
        break;
      case MachineExpr::Kind::Terminal:
        node->kind = DerivationNode::Kind::Terminal;
        emit(e.terminal_tokens);
        break;
      case MachineExpr::Kind::CatalogRef: {
        const Catalog* cat = engine.catalogs().find(e.text);
        if (!cat || cat->empty())
          throw Error("sampler: catalog '" + e.text + "' is missing or empty");
        node->kind = DerivationNode::Kind::Catalog;
        node->name = e.text;
        // Entity uniformly, then one of its aliases by normalized weight.
        const auto& groups = cat->by_entity();
        std::size_t which = rng.below(groups.size());
        auto it = groups.begin();
        std::advance(it, which);
        double roll = rng.next_double();
        std::size_t entry_idx = it->second.back().first;
        for (const auto& [idx, w] : it->second) {
          if (roll < w) { entry_idx = idx; break; }
          roll -= w;
        }
        const CatalogEntry& entry = cat->entries()[entry_idx];
        node->entity = entry.entity;
        node->prob_factor = entry.prob;  // the factor parse() would assign
        emit(entry.alias);
        break;
      }
      case MachineExpr::Kind::Ref:
        return draw_machine(e.text, &e);
      case MachineExpr::Kind::Seq:
        for (const auto& item : e.items) node->children.push_back(draw_expr(*item));
        node->kind = DerivationNode::Kind::Seq;
        break;
      case MachineExpr::Kind::Alt: {
        const auto& probs = engine.alt_probs()[e.alt_id];
        double total = 0;
        for (std::size_t b = 0; b < e.items.size(); ++b)
          if (!masked(e, b)) total += probs[b];
        if (total <= 0)
          throw Error("sampler: branch mask disables every branch of an alternation");
        double roll = rng.next_double() * total;
        std::size_t branch = e.items.size() - 1;
        for (std::size_t b = 0; b < e.items.size(); ++b) {
          if (masked(e, b)) continue;
          if (roll < probs[b]) { branch = b; break; }
          roll -= probs[b];
        }
        node->kind = DerivationNode::Kind::Alt;
        node->branch = static_cast<int>(branch);
        node->prob_factor = probs[branch];
        node->children = {draw_expr(*e.items[branch])};
        break;
      }
    }
    node->span.end = static_cast<std::uint32_t>(tokens.size());
    return node;
  }

  bool masked(const MachineExpr& alt, std::size_t branch) const {
    if (engine.alt_probs()[alt.alt_id][branch] <= 0) return true;
    if (cons.branch_mask.empty()) return false;
    // Masks address alternations by owning machine name.
    for (const auto& [machine, b] : cons.branch_mask) {
      if (b != static_cast<int>(branch)) continue;
      const Definition* def = engine.grammar().find(machine);
      if (def && owns_alt(*def->body, alt.alt_id)) return true;
    }
    return false;
  }

  static bool owns_alt(const MachineExpr& e, int alt_id) {
    if (e.kind == MachineExpr::Kind::Alt && e.alt_id == alt_id) return true;
    for (const auto& i : e.items)
      if (owns_alt(*i, alt_id)) return true;
    return false;
  }

  void emit(const std::vector<std::string>& toks) {
    for (const auto& t : toks) {
      tokens.push_back(t);
      if (tokens.size() > cons.max_tokens) throw RejectAttempt{"max_tokens"};
    }
  }
};

}  // namespace

std::vector<std::string> filter_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : filter_registry()) out.push_back(name);
  return out;
}

Sample sample(const Engine& engine, const SampleConstraints& constraints) {
  std::vector<FilterFn> filters;
  for (const auto& name : constraints.filters) {
    auto it = filter_registry().find(name);
    if (it == filter_registry().end()) throw Error("unknown sample filter '" + name + "'");
    filters.push_back(it->second);
  }

  Rng rng(Rng::mix(constraints.seed, 0x5a5a5a5aULL));
  std::map<std::string, int> rejections;
  for (int attempt = 0; attempt < constraints.max_retries; ++attempt) {
    Drawer drawer{engine, constraints, rng, {}, 0};
    Sample out;
    try {
      DerivPtr root = drawer.draw_machine(engine.grammar().start, nullptr);
      out.tokens = std::move(drawer.tokens);
      out.derivation = root;
      auto replayed = engine.replay(*root, out.tokens);
      out.exr = replayed.exr;
      // Literal-rooted results (pure counters) have no TOP form.
      if (out.exr->is_constructor()) out.top = engine.derivation_to_top(*root, out.tokens);
    } catch (const RejectAttempt& r) {
      ++rejections[r.reason];
      continue;
    }
    bool rejected = false;
    for (std::size_t f = 0; f < filters.size(); ++f) {
      if (filters[f](out)) {
        ++rejections[constraints.filters[f]];
        rejected = true;
        break;
      }
    }
    if (!rejected) return out;
  }
  std::string binding = "max_retries";
  int worst = -1;
  for (const auto& [reason, count] : rejections)
    if (count > worst) { worst = count; binding = reason; }
  throw Error("sample retry budget exhausted; binding constraint: " + binding);
}

std::string strip_leading_order(const std::string& linearized) {
  const std::string prefix = "(ORDER ";
  if (linearized.size() > prefix.size() + 1 && linearized.rfind(prefix, 0) == 0 &&
      linearized.back() == ')')
    return linearized.substr(prefix.size(), linearized.size() - prefix.size() - 1);
  return linearized;
}

std::size_t generate_dataset(const Engine& engine, std::size_t n,
                             const SampleConstraints& constraints, std::ostream& sink,
                             const GenerateOptions& options) {
  if (n == 0) return 0;
  const std::size_t chunk = 4096;
  std::size_t written = 0;
  std::vector<std::string> lines;
  for (std::size_t base = 0; base < n; base += chunk) {
    std::size_t count = std::min(chunk, n - base);
    lines.assign(count, {});
    parallel_for(count, options.workers, [&](std::size_t off) {
      std::size_t i = base + off;
      SampleConstraints record = constraints;
      record.seed = Rng::mix(constraints.seed, i);
      Sample s = sample(engine, record);
      if (!s.top) throw Error("grammar yields literal-rooted trees; cannot export TOP fields");
      std::string src;
      for (const auto& t : s.tokens) {
        if (!src.empty()) src += ' ';
        src += t;
      }
      std::string exr = linearize(s.exr);
      std::string top = linearize(s.top);
      std::string dec = linearize(decouple(s.top));
      if (options.strip_order) {
        exr = strip_leading_order(exr);
        top = strip_leading_order(top);
        dec = strip_leading_order(dec);
      }
      nlohmann::json j;
      j["id"] = std::to_string(i);
      j["src"] = src;
      j["exr"] = exr;
      j["top"] = top;
      j["top_decoupled"] = dec;
      lines[off] = j.dump();
    });
    for (const auto& line : lines) {
      sink << line << '\n';
      if (!sink)
        throw Error("dataset sink write failed after " + std::to_string(written) + " records");
      ++written;
    }
    if (options.progress) std::fprintf(stderr, "generated %zu/%zu\n", written, n);
  }
  sink.flush();
  return written;
}

}  // namespace sempar
