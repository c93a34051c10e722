#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sempar {

/// One dataset row. At least one of exr/top should be present; when both top
/// and top_decoupled are present, decoupling the former yields the latter.
struct DatasetRecord {
  std::string id;
  std::string src;
  std::optional<std::string> exr;
  std::optional<std::string> top;
  std::optional<std::string> top_decoupled;
};

/// Adapter from our field names to whatever the file at hand uses (released
/// datasets prefix fields with the split name, e.g. "dev.SRC"). Parsed from
/// "src=dev.SRC,exr=dev.EXR,top=dev.TOP,top_decoupled=dev.TOP-DECOUPLED".
struct FieldMap {
  std::string id = "id";
  std::string src = "src";
  std::string exr = "exr";
  std::string top = "top";
  std::string top_decoupled = "top_decoupled";

  static FieldMap parse(const std::string& spec);
};

/// Reads JSONL records. Rows without an id field get their 0-based line
/// number. Malformed JSON lines throw; use read_predictions for lenient
/// model-output ingestion.
std::vector<DatasetRecord> read_jsonl(std::istream& in, const FieldMap& fields = {});
std::vector<DatasetRecord> read_jsonl_file(const std::string& path, const FieldMap& fields = {});

void write_jsonl(std::ostream& out, const std::vector<DatasetRecord>& records);

/// A model prediction: the tree text is kept raw; parsing happens at scoring
/// time so malformed output can score as incorrect rather than abort.
struct Prediction {
  std::string id;
  std::string text;
};

/// JSONL {id, pred} or plain text (one linearized tree per line; the 0-based
/// line number becomes the id).
std::vector<Prediction> read_predictions(std::istream& in);
std::vector<Prediction> read_predictions_file(const std::string& path);

}  // namespace sempar
