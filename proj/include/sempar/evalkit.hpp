#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sempar/dataset.hpp"
#include "sempar/semtree.hpp"

namespace sempar {

class Engine;

enum class EmMode {
  Exr,            // unordered tree equality
  Top,            // unordered equality of the trees as given
  TopDropTokens,  // decouple both sides first, then unordered equality
};

struct EvalRecord {
  std::string id;
  std::string src;
  SemTreePtr gold;
  SemTreePtr pred;  // null = parse failure / missing prediction
  bool correct = false;
  std::string error;  // why pred is null, when it is
};

struct RunSummary {
  double em = 0.0;
  std::size_t n = 0;
  std::optional<double> subset_em;
  std::size_t subset_n = 0;
};

struct EvalReport {
  RunSummary summary;
  std::vector<EvalRecord> records;
};

/// Exact-match accuracy modulo sibling order. Predictions and golds align by
/// id; a prediction id absent from the golds is an error, a gold without a
/// prediction scores as incorrect, and malformed prediction text scores as
/// incorrect rather than aborting.
EvalReport em_score(const std::vector<Prediction>& preds,
                    const std::vector<DatasetRecord>& golds, EmMode mode);

/// EM of `model` restricted to the ids `base` got wrong (the complementarity
/// workflow). Throws if the two runs cover different id sets. An empty
/// subset reports size 0 with a null EM.
RunSummary subset_report(const EvalReport& base, const EvalReport& model);

struct DatasetStatsOptions {
  std::set<std::string> intents = {"PIZZAORDER", "DRINKORDER"};
  const Engine* engine = nullptr;  // when set, compute top-1 parser accuracy
};

struct DatasetStats {
  std::size_t n_utts = 0;
  std::size_t unique_entities = 0;
  double avg_entities_per_utt = 0.0;
  double avg_intents_per_utt = 0.0;
  std::optional<double> parser_accuracy;
  std::size_t malformed = 0;  // skipped records
};

/// Corpus statistics over the exr field: entities are leaf-slot constructor
/// occurrences, unique entities are distinct literal leaf values, intents
/// are occurrences of the configured intent constructors.
DatasetStats dataset_stats(const std::vector<DatasetRecord>& records,
                           const DatasetStatsOptions& options = {});

/// Mean and standard error (sample stddev / sqrt(n)) of >= 2 run accuracies.
std::pair<double, double> aggregate_runs(const std::vector<double>& accuracies);

/// "61.00 ± 0.71"-style rendering of aggregate_runs output, in percent.
std::string format_mean_stderr(const std::vector<double>& accuracies);

/// Report as a schema-versioned JSON document.
std::string report_to_json(const EvalReport& report, bool include_records = true);

}  // namespace sempar
