#include "sempar/evalkit.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>

#include "sempar/engine.hpp"
#include "sempar/errors.hpp"
#include "sempar/parallel.hpp"

namespace sempar {

namespace {

SemTreePtr try_parse_tree(const std::string& text, std::string* error) {
  try {
    return parse_linearized(text);
  } catch (const Error& e) {
    if (error) *error = e.what();
    return {};
  }
}

bool trees_match(const SemTreePtr& a, const SemTreePtr& b, EmMode mode) {
  switch (mode) {
    case EmMode::Exr:
    case EmMode::Top:
      return unordered_equal(a, b);
    case EmMode::TopDropTokens:
      return unordered_equal(decouple(a), decouple(b));
  }
  return false;
}

}  // namespace

EvalReport em_score(const std::vector<Prediction>& preds,
                    const std::vector<DatasetRecord>& golds, EmMode mode) {
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : preds) by_id[p.id] = &p;
  std::set<std::string> gold_ids;
  for (const auto& g : golds) gold_ids.insert(g.id);
  for (const auto& p : preds)
    if (!gold_ids.count(p.id))
      throw Error("prediction id '" + p.id + "' has no gold record");

  EvalReport report;
  report.records.resize(golds.size());
  parallel_for(golds.size(), 0, [&](std::size_t i) {
    const DatasetRecord& g = golds[i];
    EvalRecord r;
    r.id = g.id;
    r.src = g.src;
    const std::optional<std::string>& gold_text = mode == EmMode::Exr ? g.exr : g.top;
    if (!gold_text) throw Error("gold record '" + g.id + "' lacks the field for this mode");
    r.gold = parse_linearized(*gold_text);
    auto it = by_id.find(g.id);
    if (it == by_id.end()) {
      r.error = "no prediction";
    } else {
      r.pred = try_parse_tree(it->second->text, &r.error);
      if (r.pred) {
        try {
          r.correct = trees_match(r.pred, r.gold, mode);
        } catch (const Error& e) {
          r.correct = false;  // e.g. not decoupleable in TopDropTokens mode
          r.error = e.what();
        }
      }
    }
    report.records[i] = std::move(r);
  });

  std::size_t correct = 0;
  for (const auto& r : report.records) correct += r.correct ? 1 : 0;
  report.summary.n = report.records.size();
  report.summary.em =
      report.records.empty() ? 0.0 : static_cast<double>(correct) / report.records.size();
  return report;
}

RunSummary subset_report(const EvalReport& base, const EvalReport& model) {
  std::map<std::string, bool> base_correct;
  for (const auto& r : base.records) base_correct[r.id] = r.correct;
  std::map<std::string, bool> model_correct;
  for (const auto& r : model.records) model_correct[r.id] = r.correct;
  if (base_correct.size() != model_correct.size())
    throw Error("base and model runs cover different record counts");
  for (const auto& [id, c] : base_correct)
    if (!model_correct.count(id)) throw Error("id '" + id + "' missing from the model run");

  RunSummary out;
  std::size_t correct = 0;
  for (const auto& [id, base_ok] : base_correct) {
    if (base_ok) continue;
    ++out.subset_n;
    if (model_correct[id]) ++correct;
  }
  out.n = base_correct.size();
  if (out.subset_n > 0) {
    out.subset_em = static_cast<double>(correct) / static_cast<double>(out.subset_n);
    out.em = *out.subset_em;
  }
  return out;
}

namespace {

void count_tree(const SemTree& node, const std::set<std::string>& intents, std::size_t& entities,
                std::size_t& intent_count, std::set<std::string>& unique) {
  if (node.is_literal()) {
    const auto& lit = node.literal();
    if (const auto* e = std::get_if<SemTree::Entity>(&lit))
      unique.insert(e->id);
    else if (const auto* i = std::get_if<std::int64_t>(&lit))
      unique.insert(std::to_string(*i));
    else
      unique.insert(std::get<std::string>(lit));
    return;
  }
  if (!node.is_constructor()) return;
  if (is_leaf_slot(node)) ++entities;
  if (intents.count(node.name())) ++intent_count;
  for (const auto& c : node.children()) count_tree(*c, intents, entities, intent_count, unique);
}

}  // namespace

DatasetStats dataset_stats(const std::vector<DatasetRecord>& records,
                           const DatasetStatsOptions& options) {
  DatasetStats stats;
  std::set<std::string> unique;
  std::size_t total_entities = 0, total_intents = 0, parsed_correct = 0, parse_evaluated = 0;
  std::mutex mu;
  parallel_for(records.size(), 0, [&](std::size_t i) {
    const DatasetRecord& r = records[i];
    if (!r.exr) {
      std::lock_guard<std::mutex> lock(mu);
      ++stats.malformed;
      return;
    }
    SemTreePtr tree;
    try {
      tree = parse_linearized(*r.exr);
    } catch (const Error&) {
      std::lock_guard<std::mutex> lock(mu);
      ++stats.malformed;
      return;
    }
    std::size_t entities = 0, intents = 0;
    std::set<std::string> local_unique;
    count_tree(*tree, options.intents, entities, intents, local_unique);

    bool correct = false;
    if (options.engine) {
      auto tokens = tokenize(r.src, true);
      try {
        auto result = options.engine->parse(tokens, 1);
        correct = !result.items.empty() && unordered_equal(result.items[0].exr, tree);
      } catch (const Error&) {
        correct = false;
      }
    }

    std::lock_guard<std::mutex> lock(mu);
    ++stats.n_utts;
    total_entities += entities;
    total_intents += intents;
    unique.insert(local_unique.begin(), local_unique.end());
    if (options.engine) {
      ++parse_evaluated;
      if (correct) ++parsed_correct;
    }
  });
  stats.unique_entities = unique.size();
  if (stats.n_utts) {
    stats.avg_entities_per_utt = static_cast<double>(total_entities) / stats.n_utts;
    stats.avg_intents_per_utt = static_cast<double>(total_intents) / stats.n_utts;
  }
  if (options.engine && parse_evaluated)
    stats.parser_accuracy = static_cast<double>(parsed_correct) / parse_evaluated;
  if (stats.malformed)
    std::fprintf(stderr, "dataset_stats: skipped %zu malformed record(s)\n", stats.malformed);
  return stats;
}

std::pair<double, double> aggregate_runs(const std::vector<double>& accuracies) {
  if (accuracies.size() < 2)
    throw Error("aggregate_runs needs at least two values, got " +
                std::to_string(accuracies.size()));
  double mean = 0;
  for (double a : accuracies) mean += a;
  mean /= static_cast<double>(accuracies.size());
  double ss = 0;
  for (double a : accuracies) ss += (a - mean) * (a - mean);
  double stddev = std::sqrt(ss / static_cast<double>(accuracies.size() - 1));
  double stderr_ = stddev / std::sqrt(static_cast<double>(accuracies.size()));
  return {mean, stderr_};
}

std::string format_mean_stderr(const std::vector<double>& accuracies) {
  auto [mean, se] = aggregate_runs(accuracies);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", mean * 100.0, se * 100.0);
  return buf;
}

std::string report_to_json(const EvalReport& report, bool include_records) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["overall"]["em"] = report.summary.em;
  j["overall"]["n"] = report.summary.n;
  if (report.summary.subset_em) {
    j["subset"]["em"] = *report.summary.subset_em;
    j["subset"]["n"] = report.summary.subset_n;
  } else if (report.summary.subset_n || report.summary.n != report.records.size()) {
    j["subset"]["em"] = nullptr;
    j["subset"]["n"] = report.summary.subset_n;
  }
  if (include_records) {
    j["records"] = nlohmann::json::array();
    for (const auto& r : report.records) {
      nlohmann::json rec;
      rec["id"] = r.id;
      rec["correct"] = r.correct;
      if (!r.error.empty()) rec["error"] = r.error;
      j["records"].push_back(std::move(rec));
    }
  }
  return j.dump();
}

}  // namespace sempar
