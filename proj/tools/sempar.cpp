// Command-line surface for the grammar-based order parsing toolkit: parse,
// generate, convert, resolve, eval, stats. Exit codes: 0 = ran (even with
// per-record failures), 2 = configuration/usage error, 1 = internal error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "sempar/dataset.hpp"
#include "sempar/engine.hpp"
#include "sempar/errors.hpp"
#include "sempar/evalkit.hpp"
#include "sempar/flatlabels.hpp"
#include "sempar/parallel.hpp"
#include "sempar/resolver.hpp"
#include "sempar/sampler.hpp"

using nlohmann::json;
using namespace sempar;

namespace {

struct ConfigError : Error {
  using Error::Error;
};

std::string default_catalog_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("SEMPAR_CATALOG_DIR")) return env;
  return {};
}

Engine make_engine(const std::string& grammar_path, const std::string& catalog_dir,
                   const std::string& start) {
  if (grammar_path.empty()) throw ConfigError("--grammar is required");
  Grammar g;
  try {
    g = load_grammar(grammar_path);
  } catch (const Error& e) {
    throw ConfigError(std::string("grammar: ") + e.what());
  }
  if (!start.empty()) {
    if (!g.find(start)) throw ConfigError("start machine '" + start + "' not defined");
    g.start = start;
  }
  CatalogSet cats;
  if (!catalog_dir.empty()) {
    try {
      cats = CatalogSet::load_dir(catalog_dir);
    } catch (const Error& e) {
      throw ConfigError(std::string("catalogs: ") + e.what());
    }
  }
  try {
    return Engine(std::move(g), std::move(cats));
  } catch (const Error& e) {
    throw ConfigError(e.what());  // validation diagnostics
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> lines;
  std::string line;
  if (path.empty() || path == "-") {
    while (std::getline(std::cin, line)) lines.push_back(line);
    return lines;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open input file: " + path);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

// ---------------------------------------------------------------------------

int cmd_parse(const std::string& grammar_path, const std::string& catalog_dir,
              const std::string& input, const std::string& start, int top_k,
              const std::string& emit, const std::string& format, bool keep_case,
              unsigned workers) {
  Engine engine = make_engine(grammar_path, catalog_dir, start);
  std::vector<std::string> lines = read_lines(input);
  std::vector<std::string> outputs(lines.size());
  parallel_for(lines.size(), workers, [&](std::size_t i) {
    const std::string& src = lines[i];
    json j;
    j["id"] = std::to_string(i);
    j["src"] = src;
    auto tokens = tokenize(src, !keep_case);
    try {
      auto result = engine.parse(tokens, static_cast<std::size_t>(top_k));
      if (result.items.empty()) {
        j["exr"] = nullptr;
        j["error"] = "no parse";
      } else {
        const auto& best = result.items[0];
        if (emit == "exr" || emit == "both") j["exr"] = linearize(best.exr);
        if (emit == "top" || emit == "both") {
          try {
            j["top"] = linearize(engine.derivation_to_top(*best.derivation, tokens));
          } catch (const Error& e) {
            j["top"] = nullptr;
            j["error"] = e.what();
          }
        }
        j["prob"] = best.prob;
        if (result.truncated) j["truncated"] = true;
        if (result.items.size() > 1 && emit != "top") {
          j["alternatives"] = json::array();
          for (std::size_t k = 1; k < result.items.size(); ++k) {
            json alt;
            alt["exr"] = linearize(result.items[k].exr);
            alt["prob"] = result.items[k].prob;
            j["alternatives"].push_back(std::move(alt));
          }
        }
      }
    } catch (const Error& e) {
      j["exr"] = nullptr;
      j["error"] = e.what();
    }
    if (format == "json") {
      outputs[i] = j.dump();
    } else {
      std::string text;
      if (j.contains("exr") && !j["exr"].is_null()) text = j["exr"].get<std::string>();
      if (j.contains("top") && !j["top"].is_null())
        text += (text.empty() ? "" : "\t") + j["top"].get<std::string>();
      outputs[i] = text.empty() ? "<no parse>" : text;
    }
  });
  for (const auto& line : outputs) std::cout << line << '\n';
  return 0;
}

int cmd_generate(const std::string& grammar_path, const std::string& catalog_dir,
                 const std::string& start, std::size_t n, std::uint64_t seed,
                 const std::vector<std::string>& filters, bool strip_order,
                 const std::string& out_path, int max_depth, std::size_t max_tokens,
                 unsigned workers, bool progress) {
  Engine engine = make_engine(grammar_path, catalog_dir, start);
  SampleConstraints constraints;
  constraints.seed = seed;
  constraints.filters = filters;
  constraints.max_depth = max_depth;
  constraints.max_tokens = max_tokens;
  // Fail fast on unknown filter names before any output is written.
  for (const auto& f : filters) {
    bool known = false;
    for (const auto& name : filter_names()) known = known || name == f;
    if (!known) throw ConfigError("unknown filter '" + f + "'");
  }
  GenerateOptions options;
  options.strip_order = strip_order;
  options.workers = workers;
  options.progress = progress;
  if (out_path.empty() || out_path == "-") {
    generate_dataset(engine, n, constraints, std::cout, options);
  } else {
    auto out = open_out(out_path);
    generate_dataset(engine, n, constraints, out, options);
  }
  return 0;
}

int cmd_convert(const std::string& input, const std::string& out_path, const std::string& to,
                const std::string& field_map, const std::string& flatten_map_path,
                const std::string& label_view) {
  FieldMap fields = field_map.empty() ? FieldMap{} : FieldMap::parse(field_map);
  FlattenMap fm =
      flatten_map_path.empty() ? FlattenMap::defaults() : FlattenMap::load(flatten_map_path);
  std::vector<std::string> lines = read_lines(input);
  std::ostringstream body;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    bool is_json = lines[i][0] == '{';
    std::string id = std::to_string(i);
    std::string top_text;
    json j;
    if (is_json) {
      j = json::parse(lines[i]);
      if (j.contains(fields.id))
        id = j[fields.id].is_string() ? j[fields.id].get<std::string>() : j[fields.id].dump();
      if (j.contains(fields.top))
        top_text = j[fields.top].get<std::string>();
      else if (j.contains(fields.top_decoupled))
        top_text = j[fields.top_decoupled].get<std::string>();
      else
        throw ConfigError("record " + id + " has no TOP field");
    } else {
      top_text = lines[i];
    }
    SemTreePtr top = parse_linearized(top_text);
    if (to == "decoupled") {
      std::string dec = linearize(decouple(top));
      if (is_json) {
        json out;
        out["id"] = id;
        if (j.contains(fields.src)) out["src"] = j[fields.src];
        out["top_decoupled"] = dec;
        body << out.dump() << '\n';
      } else {
        body << dec << '\n';
      }
    } else {  // labels
      auto is_seq = top_to_intent_labels(top, fm);
      if (label_view == "is") {
        write_conll(body, is_seq);
      } else {
        for (const auto& span : intent_spans(top, fm))
          write_conll(body, top_to_ner_labels(top, span, fm));
      }
    }
  }
  if (out_path.empty() || out_path == "-")
    std::cout << body.str();
  else
    open_out(out_path) << body.str();
  return 0;
}

int cmd_resolve(const std::string& catalog_dir, const std::string& config_path,
                const std::string& extra_entities, const std::string& input,
                const std::string& out_path, const std::string& field) {
  std::string dir = default_catalog_dir(catalog_dir);
  if (dir.empty()) throw ConfigError("--catalog-dir (or SEMPAR_CATALOG_DIR) is required");
  CatalogSet cats;
  try {
    cats = CatalogSet::load_dir(dir);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!extra_entities.empty()) {
    try {
      cats = extend_catalogs(cats, load_extra_entities(extra_entities));
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  ResolverConfig config;
  try {
    config = config_path.empty() ? ResolverConfig::pizza_defaults()
                                 : ResolverConfig::load(config_path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  std::vector<std::string> lines = read_lines(input);
  std::ostringstream body;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    bool is_json = lines[i][0] == '{';
    std::string id = std::to_string(i);
    std::string tree_text;
    if (is_json) {
      json j = json::parse(lines[i]);
      if (j.contains("id"))
        id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
      std::string key = field.empty() ? "pred" : field;
      if (!j.contains(key)) throw ConfigError("record " + id + " lacks field '" + key + "'");
      tree_text = j[key].get<std::string>();
    } else {
      tree_text = lines[i];
    }
    std::string resolved_text;
    std::string error;
    try {
      resolved_text = linearize(resolve(parse_linearized(tree_text), cats, config));
    } catch (const Error& e) {
      error = e.what();
    }
    if (is_json) {
      json out;
      out["id"] = id;
      if (error.empty()) {
        out["pred"] = resolved_text;
      } else {
        out["pred"] = nullptr;
        out["error"] = error;
      }
      body << out.dump() << '\n';
    } else {
      body << (error.empty() ? resolved_text : "<unresolved: " + error + ">") << '\n';
    }
  }
  if (out_path.empty() || out_path == "-")
    std::cout << body.str();
  else
    open_out(out_path) << body.str();
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gold_path, const std::string& mode,
             const std::string& subset_of, const std::string& field_map,
             const std::string& report_path, const std::string& format) {
  FieldMap fields = field_map.empty() ? FieldMap{} : FieldMap::parse(field_map);
  EmMode em_mode;
  if (mode == "exr") em_mode = EmMode::Exr;
  else if (mode == "top") em_mode = EmMode::Top;
  else if (mode == "top-drop-tokens") em_mode = EmMode::TopDropTokens;
  else throw ConfigError("bad --mode '" + mode + "'");

  std::vector<DatasetRecord> golds;
  std::vector<Prediction> preds;
  try {
    golds = read_jsonl_file(gold_path, fields);
    preds = read_predictions_file(pred_path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  EvalReport report;
  try {
    report = em_score(preds, golds, em_mode);
    if (!subset_of.empty()) {
      auto base_preds = read_predictions_file(subset_of);
      EvalReport base = em_score(base_preds, golds, em_mode);
      RunSummary subset = subset_report(base, report);
      report.summary.subset_em = subset.subset_em;
      report.summary.subset_n = subset.subset_n;
    }
  } catch (const Error& e) {
    // Misaligned ids or golds lacking the mode's field are input problems.
    throw ConfigError(e.what());
  }

  std::string doc = report_to_json(report, format == "json");
  if (!report_path.empty()) open_out(report_path) << doc << '\n';
  if (format == "json") {
    std::cout << doc << '\n';
  } else {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "em %.4f over %zu records", report.summary.em,
                  report.summary.n);
    std::cout << buf << '\n';
    if (report.summary.subset_em)
      std::cout << "subset em " << *report.summary.subset_em << " over "
                << report.summary.subset_n << " records\n";
    else if (!subset_of.empty())
      std::cout << "subset em n/a over 0 records\n";
  }
  return 0;
}

int cmd_stats(const std::string& dataset_path, const std::string& grammar_path,
              const std::string& catalog_dir, const std::string& start,
              const std::string& field_map, const std::string& format) {
  FieldMap fields = field_map.empty() ? FieldMap{} : FieldMap::parse(field_map);
  std::vector<DatasetRecord> records;
  try {
    records = read_jsonl_file(dataset_path, fields);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  std::optional<Engine> engine;
  if (!grammar_path.empty()) engine.emplace(make_engine(grammar_path, catalog_dir, start));
  DatasetStatsOptions options;
  if (engine) options.engine = &*engine;
  DatasetStats stats = dataset_stats(records, options);

  if (format == "json") {
    json j;
    j["n_utts"] = stats.n_utts;
    j["unique_entities"] = stats.unique_entities;
    j["avg_entities_per_utt"] = stats.avg_entities_per_utt;
    j["avg_intents_per_utt"] = stats.avg_intents_per_utt;
    if (stats.parser_accuracy) j["parser_accuracy"] = *stats.parser_accuracy;
    j["malformed"] = stats.malformed;
    std::cout << j.dump() << '\n';
  } else {
    std::cout << "utterances           " << stats.n_utts << '\n'
              << "unique entities      " << stats.unique_entities << '\n'
              << "avg entities per utt " << stats.avg_entities_per_utt << '\n'
              << "avg intents per utt  " << stats.avg_intents_per_utt << '\n';
    if (stats.parser_accuracy)
      std::cout << "parser accuracy      " << *stats.parser_accuracy << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grammar-based task-oriented parsing toolkit"};
  app.require_subcommand(1);

  // parse
  auto* parse = app.add_subcommand("parse", "Parse utterances into EXR/TOP trees");
  std::string p_grammar, p_catalogs, p_input = "-", p_start, p_emit = "exr", p_format = "json";
  int p_topk = 5;
  bool p_keepcase = false;
  unsigned p_workers = 0;
  parse->add_option("--grammar", p_grammar, "Grammar source file (.sg)")->required();
  parse->add_option("--catalog-dir", p_catalogs, "Directory of catalog .tsv files");
  parse->add_option("--input", p_input, "Utterances, one per line ('-' = stdin)");
  parse->add_option("--start", p_start, "Start machine (default: last definition)");
  parse->add_option("--top-k", p_topk, "Ranked parses to keep")->check(CLI::PositiveNumber);
  parse->add_option("--emit", p_emit, "exr|top|both")
      ->check(CLI::IsMember({"exr", "top", "both"}));
  parse->add_option("--format", p_format, "json|text")->check(CLI::IsMember({"json", "text"}));
  parse->add_flag("--keep-case", p_keepcase, "Skip utterance lowercasing");
  parse->add_option("--workers", p_workers, "Worker threads (0 = auto)");

  // generate
  auto* generate = app.add_subcommand("generate", "Sample a synthetic dataset");
  std::string g_grammar, g_catalogs, g_start, g_out;
  std::size_t g_n = 0;
  std::uint64_t g_seed = 0;
  std::vector<std::string> g_filters;
  bool g_strip = false;
  int g_depth = 48;
  std::size_t g_maxtok = 48;
  unsigned g_workers = 0;
  generate->add_option("--grammar", g_grammar)->required();
  generate->add_option("--catalog-dir", g_catalogs);
  generate->add_option("--start", g_start);
  generate->add_option("-n,--count", g_n, "Records to generate")
      ->required()
      ->check(CLI::PositiveNumber);
  generate->add_option("--seed", g_seed, "Base seed (record i uses stream (seed, i))");
  generate->add_option("--filters", g_filters, "Named reject filters")->delimiter(',');
  generate->add_flag("--strip-order", g_strip, "Drop the leading ORDER constructor");
  generate->add_option("--out", g_out, "Output JSONL ('-' = stdout)");
  generate->add_option("--max-depth", g_depth);
  generate->add_option("--max-tokens", g_maxtok);
  generate->add_option("--workers", g_workers);
  bool g_progress = false;
  generate->add_flag("--progress", g_progress, "Report progress on stderr");

  // convert
  auto* convert = app.add_subcommand("convert", "TOP -> TOP-Decoupled or BIO labels");
  std::string c_input = "-", c_out, c_from = "top", c_to, c_fieldmap, c_flatten, c_view = "is";
  convert->add_option("--from", c_from)->check(CLI::IsMember({"top"}));
  convert->add_option("--to", c_to, "decoupled|labels")
      ->required()
      ->check(CLI::IsMember({"decoupled", "labels"}));
  convert->add_option("--input", c_input);
  convert->add_option("--out", c_out);
  convert->add_option("--field-map", c_fieldmap);
  convert->add_option("--flatten-map", c_flatten, "FlattenMap JSON file");
  convert->add_option("--label-view", c_view, "is|ner")->check(CLI::IsMember({"is", "ner"}));

  // resolve
  auto* resolve_cmd = app.add_subcommand("resolve", "Entity-resolve TOP trees into EXR");
  std::string r_catalogs, r_config, r_extra, r_input = "-", r_out, r_field;
  resolve_cmd->add_option("--catalog-dir", r_catalogs);
  resolve_cmd->add_option("--config", r_config, "ResolverConfig JSON");
  resolve_cmd->add_option("--extra-entities", r_extra, "4-column TSV of extra aliases");
  resolve_cmd->add_option("--input", r_input);
  resolve_cmd->add_option("--out", r_out);
  resolve_cmd->add_option("--field", r_field, "JSON field holding the tree (default pred)");

  // eval
  auto* eval = app.add_subcommand("eval", "Exact-match evaluation");
  std::string e_pred, e_gold, e_mode = "exr", e_subset, e_fieldmap, e_report, e_format = "json";
  eval->add_option("--pred", e_pred)->required();
  eval->add_option("--gold", e_gold)->required();
  eval->add_option("--mode", e_mode, "exr|top|top-drop-tokens")
      ->check(CLI::IsMember({"exr", "top", "top-drop-tokens"}));
  eval->add_option("--subset-of", e_subset, "Base predictions; report EM on its errors");
  eval->add_option("--field-map", e_fieldmap);
  eval->add_option("--report", e_report, "Write the JSON report here too");
  eval->add_option("--format", e_format)->check(CLI::IsMember({"json", "text"}));

  // stats
  auto* stats = app.add_subcommand("stats", "Dataset statistics");
  std::string s_dataset, s_grammar, s_catalogs, s_start, s_fieldmap, s_format = "json";
  stats->add_option("--dataset", s_dataset)->required();
  stats->add_option("--grammar", s_grammar, "Compute top-1 parser accuracy too");
  stats->add_option("--catalog-dir", s_catalogs);
  stats->add_option("--start", s_start);
  stats->add_option("--field-map", s_fieldmap);
  stats->add_option("--format", s_format)->check(CLI::IsMember({"json", "text"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*parse)
      return cmd_parse(p_grammar, default_catalog_dir(p_catalogs), p_input, p_start, p_topk,
                       p_emit, p_format, p_keepcase, p_workers);
    if (*generate)
      return cmd_generate(g_grammar, default_catalog_dir(g_catalogs), g_start, g_n, g_seed,
                          g_filters, g_strip, g_out, g_depth, g_maxtok, g_workers, g_progress);
    if (*convert) return cmd_convert(c_input, c_out, c_to, c_fieldmap, c_flatten, c_view);
    if (*resolve_cmd)
      return cmd_resolve(r_catalogs, r_config, r_extra, r_input, r_out, r_field);
    if (*eval) return cmd_eval(e_pred, e_gold, e_mode, e_subset, e_fieldmap, e_report, e_format);
    if (*stats)
      return cmd_stats(s_dataset, s_grammar, default_catalog_dir(s_catalogs), s_start,
                       s_fieldmap, s_format);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
