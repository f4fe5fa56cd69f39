#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "teig/symtensor.hpp"

namespace teig {

/// Whole-file atomic write: stage to a sibling temp file, then rename over
/// the target, so readers never observe a partial file.
inline void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_file_atomic: cannot open " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write_file_atomic: write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("read_file: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Tensor file format:
///   {"order": m, "dim": n, "entries": [{"idx": [i1,...,im], "val": v}, ...]}
/// Indices are 1-based and canonically sorted in files; unsorted tuples are
/// canonicalized on input, duplicates (after sorting) and out-of-range
/// indices are rejected.
inline SymTensor parse_tensor_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("tensor JSON: parse error: ") + e.what());
  }
  if (!j.is_object() || !j.contains("order") || !j.contains("dim") || !j.contains("entries"))
    throw std::invalid_argument("tensor JSON: expected object with order, dim, entries");
  if (!j["order"].is_number_integer() || !j["dim"].is_number_integer() || !j["entries"].is_array())
    throw std::invalid_argument("tensor JSON: bad field types");
  int order = j["order"].get<int>();
  int dim = j["dim"].get<int>();

  std::vector<std::pair<std::vector<int>, double>> entries;
  entries.reserve(j["entries"].size());
  for (const auto& e : j["entries"]) {
    if (!e.is_object() || !e.contains("idx") || !e.contains("val") || !e["idx"].is_array() ||
        !e["val"].is_number())
      throw std::invalid_argument("tensor JSON: entry must be {\"idx\": [...], \"val\": v}");
    std::vector<int> idx;
    idx.reserve(e["idx"].size());
    for (const auto& i : e["idx"]) {
      if (!i.is_number_integer()) throw std::invalid_argument("tensor JSON: non-integer index");
      int v = i.get<int>();
      if (v < 1 || v > dim) throw std::invalid_argument("tensor JSON: index out of range [1, dim]");
      idx.push_back(v - 1);  // to the library's 0-based convention
    }
    entries.emplace_back(std::move(idx), e["val"].get<double>());
  }
  return SymTensor::from_entries(order, dim, std::move(entries));  // rejects duplicates, odd order
}

inline SymTensor load_tensor_file(const std::string& path) { return parse_tensor_json(read_file(path)); }

/// Serializes with entries in lexicographic canonical order and shortest
/// round-trip number formatting, so equal tensors produce identical bytes
/// and a parse round-trip is exact.
inline std::string tensor_to_json(const SymTensor& t) {
  nlohmann::ordered_json j;
  j["order"] = t.order();
  j["dim"] = t.dim();
  j["entries"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < t.entry_count(); ++k) {
    nlohmann::ordered_json e;
    auto idx = t.entry_index(k);
    for (int& i : idx) ++i;  // 1-based on disk
    e["idx"] = idx;
    e["val"] = t.entry_value(k);
    j["entries"].push_back(std::move(e));
  }
  return j.dump() + "\n";
}

inline void save_tensor_file(const std::string& path, const SymTensor& t) {
  write_file_atomic(path, tensor_to_json(t));
}

}  // namespace teig
