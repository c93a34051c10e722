#include "sempar/flatlabels.hpp"

#include <json.hpp>

#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

#include "sempar/errors.hpp"

namespace sempar {

FlattenMap FlattenMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open flatten map: " + path);
  nlohmann::json j;
  in >> j;
  FlattenMap fm;
  if (j.contains("intents")) {
    fm.intents.clear();
    for (const auto& name : j["intents"]) fm.intents.insert(name.get<std::string>());
  }
  if (j.contains("root")) fm.root = j["root"].get<std::string>();
  if (j.contains("paths")) {
    fm.paths.clear();
    for (const auto& [path, label] : j["paths"].items())
      fm.paths[path] = label.get<std::string>();
  }
  return fm;
}

std::string FlattenMap::label_for(const std::vector<std::string>& path) const {
  if (path.size() == 1) return path[0];
  std::string key;
  for (const auto& p : path) {
    if (!key.empty()) key += '/';
    key += p;
  }
  auto it = paths.find(key);
  return it == paths.end() ? std::string{} : it->second;
}

std::vector<std::string> FlattenMap::path_for(const std::string& label) const {
  for (const auto& [key, mapped] : paths) {
    if (mapped != label) continue;
    std::vector<std::string> path;
    std::size_t pos = 0;
    for (;;) {
      std::size_t slash = key.find('/', pos);
      path.push_back(key.substr(pos, slash == std::string::npos ? slash : slash - pos));
      if (slash == std::string::npos) break;
      pos = slash + 1;
    }
    return path;
  }
  if (is_constructor_name(label)) return {label};
  return {};
}

// ---------------------------------------------------------------------------
// Encoding

namespace {

// Token positions come from a left-to-right walk; `owner` gets one entry per
// token, holding the id of the innermost enclosing intent instance (or -1).
void walk_intents(const SemTree& node, const FlattenMap& fm, int under, int* next_id,
                  std::vector<std::string>& tokens, std::vector<int>& owner,
                  std::vector<std::string>& names) {
  if (node.is_token()) {
    tokens.push_back(node.token_text());
    owner.push_back(under);
    return;
  }
  if (!node.is_constructor()) return;
  int here = under;
  if (fm.intents.count(node.name())) {
    if (under >= 0)
      throw Error("nested intent " + node.name() + " inside " + names[under] + " is unsupported");
    here = (*next_id)++;
    names.push_back(node.name());
  }
  for (const auto& c : node.children())
    walk_intents(*c, fm, here, next_id, tokens, owner, names);
}

}  // namespace

LabeledSequence top_to_intent_labels(const SemTreePtr& top, const FlattenMap& fm) {
  std::vector<std::string> tokens, names;
  std::vector<int> owner;
  int next_id = 0;
  walk_intents(*top, fm, -1, &next_id, tokens, owner, names);
  LabeledSequence seq;
  seq.tokens = tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (owner[i] < 0)
      seq.labels.push_back("Other");
    else if (i > 0 && owner[i - 1] == owner[i])
      seq.labels.push_back("I-" + names[owner[i]]);
    else
      seq.labels.push_back("B-" + names[owner[i]]);
  }
  return seq;
}

namespace {

struct NerWalk {
  const FlattenMap& fm;
  std::size_t pos = 0;  // global token position
  const IntentSpan& span;
  LabeledSequence& seq;
  bool inside = false;

  void emit(const std::string& token, const std::string& slot_label, bool first) {
    if (pos >= span.begin && pos < span.end) {
      seq.tokens.push_back(token);
      if (slot_label.empty())
        seq.labels.push_back("Other");
      else
        seq.labels.push_back((first ? "B-" : "I-") + slot_label);
    }
    ++pos;
  }

  void walk(const SemTree& node, std::vector<std::string> path, bool in_intent) {
    if (node.is_token()) {
      emit(node.token_text(), "", true);
      return;
    }
    if (!node.is_constructor()) return;
    bool intent_here = fm.intents.count(node.name()) > 0;
    if (!in_intent && !intent_here) {
      for (const auto& c : node.children()) walk(*c, {}, false);
      return;
    }
    if (intent_here) {
      for (const auto& c : node.children()) walk(*c, {}, true);
      return;
    }
    // Below an intent: extend the constructor path.
    path.push_back(node.name());
    if (is_leaf_slot(node)) {
      std::string label = fm.label_for(path);
      if (label.empty()) {
        std::string key;
        for (const auto& p : path) key += (key.empty() ? "" : "/") + p;
        throw Error("constructor path " + key +
                    " is not expressible in the flatten map (lossy flattening)");
      }
      bool first = true;
      for (const auto& c : node.children()) {
        if (!c->is_token()) continue;
        emit(c->token_text(), label, first);
        first = false;
      }
      return;
    }
    for (const auto& c : node.children()) {
      if (c->is_token()) {
        emit(c->token_text(), "", true);
        continue;
      }
      walk(*c, path, true);
    }
  }
};

}  // namespace

LabeledSequence top_to_ner_labels(const SemTreePtr& top, const IntentSpan& span,
                                  const FlattenMap& fm) {
  LabeledSequence seq;
  NerWalk w{fm, 0, span, seq, false};
  w.walk(*top, {}, false);
  return seq;
}

LabeledSequence repair(const LabeledSequence& seq) {
  LabeledSequence out = seq;
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    const std::string& l = out.labels[i];
    if (l.rfind("I-", 0) != 0) continue;
    std::string suffix = l.substr(2);
    // Checked against the already-repaired predecessor, so a solitary run
    // I-X I-X collapses to Other Other in one pass.
    bool ok = i > 0 && (out.labels[i - 1] == "B-" + suffix || out.labels[i - 1] == "I-" + suffix);
    if (!ok) out.labels[i] = "Other";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decoding

namespace {

struct Run {
  std::string label;
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<Run> bio_runs(const std::vector<std::string>& labels, std::size_t offset) {
  std::vector<Run> runs;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string& l = labels[i];
    if (l.rfind("B-", 0) == 0) {
      runs.push_back({l.substr(2), offset + i, offset + i + 1});
    } else if (l.rfind("I-", 0) == 0) {
      if (runs.empty() || runs.back().label != l.substr(2) || runs.back().end != offset + i)
        throw Error("inconsistent BIO sequence: dangling " + l + " (repair first)");
      runs.back().end = offset + i + 1;
    } else if (l != "Other") {
      throw Error("unknown label '" + l + "'");
    }
  }
  return runs;
}

}  // namespace

std::vector<IntentSpan> intent_spans(const SemTreePtr& top, const FlattenMap& fm) {
  LabeledSequence seq = top_to_intent_labels(top, fm);
  std::vector<IntentSpan> spans;
  for (const Run& r : bio_runs(seq.labels, 0)) spans.push_back({r.label, r.begin, r.end});
  return spans;
}

SemTreePtr labels_to_top(const std::vector<std::string>& tokens, const LabeledSequence& is_labels,
                         const std::vector<LabeledSequence>& ner_per_span, const FlattenMap& fm) {
  if (is_labels.labels.size() != tokens.size())
    throw Error("intent labels and tokens differ in length");
  if (tokens.empty()) throw Error("cannot build a tree from an empty utterance");
  std::vector<Run> spans = bio_runs(is_labels.labels, 0);
  if (spans.size() != ner_per_span.size())
    throw Error("got " + std::to_string(ner_per_span.size()) + " NER sequences for " +
                std::to_string(spans.size()) + " intent spans");

  std::vector<SemTreePtr> top_children;
  std::size_t cursor = 0;
  for (std::size_t s = 0; s < spans.size(); ++s) {
    const Run& intent = spans[s];
    for (; cursor < intent.begin; ++cursor)
      top_children.push_back(SemTree::token(tokens[cursor]));

    const LabeledSequence& ner = ner_per_span[s];
    if (ner.labels.size() != intent.end - intent.begin)
      throw Error("NER sequence length does not match its intent span");
    std::vector<SemTreePtr> intent_children;
    std::vector<Run> slots = bio_runs(ner.labels, intent.begin);
    std::size_t inner = intent.begin;

    // Consecutive slots sharing an intermediate constructor fold into one
    // instance while their leaf constructors differ, so QUANTITY+TOPPING
    // pairs rebuild a single COMPLEX_TOPPING.
    std::string open_intermediate;
    std::vector<SemTreePtr> open_children;
    auto flush_intermediate = [&] {
      if (open_intermediate.empty()) return;
      intent_children.push_back(SemTree::make(open_intermediate, std::move(open_children)));
      open_intermediate.clear();
      open_children.clear();
    };

    for (const Run& slot : slots) {
      for (; inner < slot.begin; ++inner) {
        flush_intermediate();
        intent_children.push_back(SemTree::token(tokens[inner]));
      }
      std::vector<std::string> path = fm.path_for(slot.label);
      if (path.empty()) throw Error("label " + slot.label + " has no constructor path");
      std::vector<SemTreePtr> words;
      for (std::size_t i = slot.begin; i < slot.end; ++i)
        words.push_back(SemTree::token(tokens[i]));
      SemTreePtr leaf = SemTree::make(path.back(), std::move(words));
      if (path.size() == 1) {
        flush_intermediate();
        intent_children.push_back(leaf);
      } else {
        const std::string& mid = path[0];
        bool mergeable = open_intermediate == mid;
        if (mergeable)
          for (const auto& existing : open_children)
            if (existing->name() == path.back()) mergeable = false;
        if (!mergeable) flush_intermediate();
        open_intermediate = mid;
        open_children.push_back(leaf);
      }
      inner = slot.end;
    }
    for (; inner < intent.end; ++inner) {
      flush_intermediate();
      intent_children.push_back(SemTree::token(tokens[inner]));
    }
    flush_intermediate();
    if (intent_children.empty()) throw Error("intent span rebuilt with no content");
    top_children.push_back(SemTree::make(intent.label, std::move(intent_children)));
    cursor = intent.end;
  }
  for (; cursor < tokens.size(); ++cursor)
    top_children.push_back(SemTree::token(tokens[cursor]));
  return SemTree::make(fm.root, std::move(top_children));
}

// ---------------------------------------------------------------------------
// CoNLL I/O

void write_conll(std::ostream& out, const LabeledSequence& seq) {
  for (std::size_t i = 0; i < seq.tokens.size(); ++i)
    out << seq.tokens[i] << '\t' << seq.labels[i] << '\n';
  out << '\n';
}

std::vector<LabeledSequence> read_conll(std::istream& in) {
  std::vector<LabeledSequence> out;
  LabeledSequence current;
  std::string line;
  auto flush = [&] {
    if (!current.tokens.empty()) out.push_back(std::move(current));
    current = {};
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw Error("CoNLL line without a tab: '" + line + "'");
    current.tokens.push_back(line.substr(0, tab));
    current.labels.push_back(line.substr(tab + 1));
  }
  flush();
  return out;
}

}  // namespace sempar
