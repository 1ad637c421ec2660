#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dripper/complexity.hpp"
#include "dripper/detail/utf8.hpp"
#include "dripper/error.hpp"

namespace dripper {

struct BenchmarkRecord {
  std::string track_id;
  std::string html;
  std::string main_html;
  std::string convert_main_content;
  std::map<std::string, std::string> meta;  // language, style, level, table, code, equation

  [[nodiscard]] std::string meta_value(const std::string& key) const {
    auto it = meta.find(key);
    return it == meta.end() ? std::string() : it->second;
  }
  [[nodiscard]] std::string level() const { return meta_value("level"); }
  [[nodiscard]] bool has(const std::string& flag) const { return meta_value(flag) == "with"; }
  [[nodiscard]] bool conversational() const { return detail::ascii_lower(meta_value("style")) == "conversational"; }
};

struct BenchmarkSet {
  std::vector<BenchmarkRecord> records;
  std::size_t skipped = 0;
  std::vector<std::string> diagnostics;
};

/// easy/simple -> simple, mid/medium -> mid, hard -> hard; anything else is
/// rejected.
inline std::optional<std::string> normalize_level(std::string_view level) {
  const std::string l = detail::ascii_lower(detail::trim_ascii(level));
  if (l == "easy" || l == "simple") return "simple";
  if (l == "mid" || l == "medium") return "mid";
  if (l == "hard") return "hard";
  return std::nullopt;
}

namespace detail {

inline std::optional<std::string> record_from_json(const nlohmann::json& j, std::size_t index, BenchmarkRecord& out) {
  if (!j.is_object()) return "not a JSON object";
  auto string_field = [&](const char* key, bool required, std::string& dst) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required) return std::string("missing `") + key + "`";
      return std::nullopt;
    }
    if (!it->is_string()) return std::string("`") + key + "` is not a string";
    dst = it->get<std::string>();
    return std::nullopt;
  };
  BenchmarkRecord r;
  if (auto e = string_field("html", true, r.html)) return e;
  if (r.html.empty()) return "empty `html`";
  if (auto e = string_field("convert_main_content", true, r.convert_main_content)) return e;
  if (auto e = string_field("main_html", false, r.main_html)) return e;
  if (j.contains("track_id") && j["track_id"].is_number()) {
    r.track_id = j["track_id"].dump();
  } else if (auto e = string_field("track_id", false, r.track_id)) {
    return e;
  }
  if (r.track_id.empty()) r.track_id = "#" + std::to_string(index + 1);
  if (auto it = j.find("meta"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) return "`meta` is not an object";
    for (auto m = it->begin(); m != it->end(); ++m) {
      if (!m.value().is_string()) return "meta `" + m.key() + "` is not a string";
      r.meta[m.key()] = m.value().get<std::string>();
    }
  }
  if (auto lv = r.meta.find("level"); lv != r.meta.end()) {
    const auto norm = normalize_level(lv->second);
    if (!norm) return "unknown level `" + lv->second + "`";
    lv->second = *norm;
  }
  out = std::move(r);
  return std::nullopt;
}

// Pages without annotations get their level and rich-content flags computed
// here, levels relative to the unannotated part of the corpus.
inline void fill_missing_annotations(std::vector<BenchmarkRecord>& records) {
  std::vector<std::size_t> unlevelled;
  std::vector<ComplexityMetrics> metrics;
  for (std::size_t i = 0; i < records.size(); ++i) {
    BenchmarkRecord& r = records[i];
    const bool need_flags = !r.meta.count("table") || !r.meta.count("code") || !r.meta.count("equation");
    const bool need_level = !r.meta.count("level");
    if (!need_flags && !need_level) continue;
    const DomTree tree = parse_html_text(r.html);
    if (need_flags) {
      const RichContentFlags f = rich_content_tags(tree);
      r.meta.emplace("table", f.table ? "with" : "without");
      r.meta.emplace("code", f.code ? "with" : "without");
      r.meta.emplace("equation", f.equation ? "with" : "without");
    }
    if (need_level) {
      unlevelled.push_back(i);
      metrics.push_back(complexity_metrics(tree));
    }
  }
  const auto profiles = finalize_complexity(metrics);
  for (std::size_t k = 0; k < unlevelled.size(); ++k) records[unlevelled[k]].meta["level"] = to_string(profiles[k].level);
}

}  // namespace detail

/// Parses JSONL (one object per line) or a JSON array. Invalid records are
/// skipped and counted.
inline BenchmarkSet parse_benchmark(std::string_view content) {
  BenchmarkSet set;
  auto take = [&](const nlohmann::json& j, std::size_t index, const std::string& where) {
    BenchmarkRecord r;
    if (auto err = detail::record_from_json(j, index, r)) {
      ++set.skipped;
      set.diagnostics.push_back(where + ": " + *err);
      return;
    }
    set.records.push_back(std::move(r));
  };
  const std::string_view body = detail::trim_ascii(content);
  if (!body.empty() && body.front() == '[') {
    nlohmann::json arr;
    try {
      arr = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("benchmark array is not valid JSON: ") + e.what());
    }
    for (std::size_t i = 0; i < arr.size(); ++i) take(arr[i], i, "record " + std::to_string(i + 1));
  } else {
    std::size_t line_no = 0, start = 0;
    while (start < content.size()) {
      std::size_t nl = content.find('\n', start);
      if (nl == std::string_view::npos) nl = content.size();
      const std::string_view line = detail::trim_ascii(content.substr(start, nl - start));
      start = nl + 1;
      ++line_no;
      if (line.empty()) continue;
      const std::string where = "line " + std::to_string(line_no);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        ++set.skipped;
        set.diagnostics.push_back(where + ": invalid JSON");
        continue;
      }
      take(j, set.records.size() + set.skipped, where);
    }
  }
  detail::fill_missing_annotations(set.records);
  return set;
}

inline BenchmarkSet load_benchmark(const std::string& path) {
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) throw Error(ErrorCode::UnreadableFile, path + " is a directory");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot read benchmark " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::UnreadableFile, "error reading benchmark " + path);
  return parse_benchmark(ss.str());
}

}  // namespace dripper
