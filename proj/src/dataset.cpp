#include "sempar/dataset.hpp"

#include <json.hpp>

#include <fstream>
#include <istream>
#include <ostream>

#include "sempar/errors.hpp"

namespace sempar {

FieldMap FieldMap::parse(const std::string& spec) {
  FieldMap fm;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    std::size_t comma = spec.find(',', pos);
    std::string item = spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
    std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw Error("bad field-map entry '" + item + "' (want name=field)");
    std::string key = item.substr(0, eq);
    std::string value = item.substr(eq + 1);
    if (key == "id") fm.id = value;
    else if (key == "src") fm.src = value;
    else if (key == "exr") fm.exr = value;
    else if (key == "top") fm.top = value;
    else if (key == "top_decoupled") fm.top_decoupled = value;
    else throw Error("unknown field-map key '" + key + "'");
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return fm;
}

std::vector<DatasetRecord> read_jsonl(std::istream& in, const FieldMap& fields) {
  std::vector<DatasetRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) { ++lineno; continue; }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error("line " + std::to_string(lineno + 1) + ": " + e.what());
    }
    DatasetRecord r;
    r.id = j.contains(fields.id) ? j[fields.id].is_string()
                                       ? j[fields.id].get<std::string>()
                                       : j[fields.id].dump()
                                 : std::to_string(lineno);
    if (j.contains(fields.src)) r.src = j[fields.src].get<std::string>();
    if (j.contains(fields.exr)) r.exr = j[fields.exr].get<std::string>();
    if (j.contains(fields.top)) r.top = j[fields.top].get<std::string>();
    if (j.contains(fields.top_decoupled))
      r.top_decoupled = j[fields.top_decoupled].get<std::string>();
    out.push_back(std::move(r));
    ++lineno;
  }
  return out;
}

std::vector<DatasetRecord> read_jsonl_file(const std::string& path, const FieldMap& fields) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset file: " + path);
  return read_jsonl(in, fields);
}

void write_jsonl(std::ostream& out, const std::vector<DatasetRecord>& records) {
  for (const auto& r : records) {
    nlohmann::json j;
    j["id"] = r.id;
    j["src"] = r.src;
    if (r.exr) j["exr"] = *r.exr;
    if (r.top) j["top"] = *r.top;
    if (r.top_decoupled) j["top_decoupled"] = *r.top_decoupled;
    out << j.dump() << '\n';
  }
}

std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Prediction p;
    p.id = std::to_string(lineno);
    if (!line.empty() && line[0] == '{') {
      try {
        nlohmann::json j = nlohmann::json::parse(line);
        if (j.contains("id"))
          p.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
        if (j.contains("pred") && j["pred"].is_string()) p.text = j["pred"].get<std::string>();
      } catch (const nlohmann::json::exception&) {
        p.text = line;  // malformed JSON scores as an unparseable prediction
      }
    } else {
      p.text = line;
    }
    out.push_back(std::move(p));
    ++lineno;
  }
  return out;
}

std::vector<Prediction> read_predictions_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open prediction file: " + path);
  return read_predictions(in);
}

}  // namespace sempar
