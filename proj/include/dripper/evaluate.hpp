#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dripper/benchmark.hpp"
#include "dripper/classifier.hpp"
#include "dripper/cost.hpp"
#include "dripper/detail/parallel.hpp"
#include "dripper/error.hpp"
#include "dripper/labels.hpp"
#include "dripper/pipeline.hpp"
#include "dripper/preprocess.hpp"
#include "dripper/rouge.hpp"
#include "dripper/tokenizer.hpp"

namespace dripper {

using Extractor = std::function<ExtractionResult(const BenchmarkRecord&)>;

struct EvalOptions {
  std::size_t jobs = 1;
  int n = 5;
  RougeTokenizer tokenizer = rouge_tokenize;
};

struct RecordOutcome {
  std::string track_id;
  RougeScore score;
  bool oversize = false;
  bool failed = false;
  bool used_fallback = false;
  std::string level;
  bool table = false;
  bool code = false;
  bool equation = false;
  bool conversational = false;
  std::vector<std::string> diagnostics;
};

struct StratumScore {
  std::string name;
  std::size_t count = 0;
  double mean_f1 = 0.0;
};

inline const std::vector<std::string>& stratum_names() {
  static const std::vector<std::string> names{"all", "simple", "mid", "hard", "table", "code", "equation", "conversational"};
  return names;
}

struct EvalReport {
  int n = 5;
  std::vector<RecordOutcome> records;
  std::vector<StratumScore> strata;  // in stratum_names() order
  std::size_t oversize = 0;
  std::size_t failed = 0;
  std::size_t used_fallback = 0;

  [[nodiscard]] double overall() const { return strata.empty() ? 0.0 : strata.front().mean_f1; }

  [[nodiscard]] const StratumScore& stratum(const std::string& name) const {
    for (const auto& s : strata) {
      if (s.name == name) return s;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown stratum " + name);
  }

  [[nodiscard]] nlohmann::json to_json(bool with_records = false) const {
    nlohmann::json j;
    j["metric"] = "rouge-" + std::to_string(n) + "-f1";
    j["records"] = records.size();
    j["oversize"] = oversize;
    j["failed"] = failed;
    j["used_fallback"] = used_fallback;
    nlohmann::json strata_json = nlohmann::json::object();
    for (const auto& s : strata) {
      strata_json[s.name] = {{"count", s.count}, {"mean_f1", s.count ? nlohmann::json(s.mean_f1) : nlohmann::json()}};
    }
    j["strata"] = strata_json;
    if (with_records) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : records) {
        rows.push_back({{"track_id", r.track_id},
                        {"f1", r.score.f1},
                        {"precision", r.score.precision},
                        {"recall", r.score.recall},
                        {"oversize", r.oversize},
                        {"failed", r.failed},
                        {"used_fallback", r.used_fallback},
                        {"level", r.level},
                        {"diagnostics", r.diagnostics}});
      }
      j["per_record"] = rows;
    }
    return j;
  }

  [[nodiscard]] std::string to_text() const {
    std::string head = "         ", count_row = "n        ", score_row = "rouge-" + std::to_string(n) + "  ";
    char buf[64];
    for (const auto& s : strata) {
      const int w = static_cast<int>(std::max<std::size_t>(s.name.size(), 6)) + 2;
      std::snprintf(buf, sizeof buf, "%*s", w, s.name.c_str());
      head += buf;
      std::snprintf(buf, sizeof buf, "%*zu", w, s.count);
      count_row += buf;
      if (s.count) std::snprintf(buf, sizeof buf, "%*.4f", w, s.mean_f1);
      else std::snprintf(buf, sizeof buf, "%*s", w, "-");
      score_row += buf;
    }
    return head + "\n" + count_row + "\n" + score_row + "\n" + "oversize " + std::to_string(oversize) + ", failed " +
           std::to_string(failed) + ", fallback " + std::to_string(used_fallback) + "\n";
  }
};

namespace detail {

inline bool in_stratum(const RecordOutcome& r, const std::string& name) {
  if (name == "all") return true;
  if (name == "simple" || name == "mid" || name == "hard") return r.level == name;
  if (name == "table") return r.table;
  if (name == "code") return r.code;
  if (name == "equation") return r.equation;
  if (name == "conversational") return r.conversational;
  return false;
}

}  // namespace detail

/// Scores every record's extraction against its ground-truth markdown.
/// Oversize and failed extractions count as 0.
inline EvalReport evaluate_run(const std::vector<BenchmarkRecord>& records, const Extractor& extractor,
                               const EvalOptions& options = {}) {
  EvalReport report;
  report.n = options.n;
  report.records.resize(records.size());
  detail::parallel_for(records.size(), options.jobs, [&](std::size_t i) {
    const BenchmarkRecord& rec = records[i];
    RecordOutcome& out = report.records[i];
    out.track_id = rec.track_id;
    out.level = rec.level();
    out.table = rec.has("table");
    out.code = rec.has("code");
    out.equation = rec.has("equation");
    out.conversational = rec.conversational();
    out.score.n = options.n;
    try {
      const ExtractionResult res = extractor(rec);
      out.oversize = res.oversize;
      out.used_fallback = res.used_fallback;
      out.diagnostics = res.diagnostics;
      if (res.oversize && !res.used_fallback) return;  // gated: scores 0
      out.score = rouge_n_f1(res.markdown, rec.convert_main_content, options.n, options.tokenizer);
    } catch (const std::exception& e) {
      out.failed = true;
      out.diagnostics.emplace_back(e.what());
    }
  });
  for (const auto& r : report.records) {
    report.oversize += r.oversize;
    report.failed += r.failed;
    report.used_fallback += r.used_fallback;
  }
  for (const std::string& name : stratum_names()) {
    StratumScore s{name, 0, 0.0};
    double sum = 0.0;
    for (const auto& r : report.records) {
      if (!detail::in_stratum(r, name)) continue;
      ++s.count;
      sum += r.score.f1;
    }
    s.mean_f1 = s.count ? sum / static_cast<double>(s.count) : 0.0;
    report.strata.push_back(s);
  }
  return report;
}

/// Extractor running the full pipeline with the given classifier.
inline Extractor pipeline_extractor(const Classifier& classifier, ExtractOptions options = {}) {
  return [&classifier, options](const BenchmarkRecord& rec) { return extract(rec.html, classifier, options); };
}

/// Extractor replaying the ground truth.
inline Extractor oracle_extractor() {
  return [](const BenchmarkRecord& rec) {
    ExtractionResult r;
    r.markdown = rec.convert_main_content;
    r.main_html = rec.main_html;
    return r;
  };
}

// ---------------------------------------------------------------------------
// Overhead report

struct OverheadOptions {
  double L = 28;
  double d = 1024;
  const Tokenizer* tokenizer = nullptr;
  const Classifier* classifier = nullptr;  // labels for the emitted JSON; heuristic when null
  SimplifyConfig simplify;
  std::size_t jobs = 1;
};

struct OverheadStats {
  double mean = 0.0;
  double median = 0.0;
};

struct OverheadRow {
  std::string name;
  OverheadStats input;
  OverheadStats output;
  OverheadStats cost;
};

struct OverheadRecord {
  std::string track_id;
  double input_without = 0, output_without = 0, cost_without = 0;
  double input_with = 0, output_with = 0, cost_with = 0;
};

struct OverheadReport {
  OverheadRow without{"Without", {}, {}, {}};
  OverheadRow with{"With", {}, {}, {}};
  OverheadRow ratio{"Ratio", {}, {}, {}};  // With / Without, as fractions
  std::vector<OverheadRecord> records;
  std::size_t skipped = 0;
  std::vector<std::string> diagnostics;

  [[nodiscard]] nlohmann::json to_json() const {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
    auto row = [&](const OverheadRow& r) {
      return nlohmann::json{{"input", {{"mean", num(r.input.mean)}, {"median", num(r.input.median)}}},
                            {"output", {{"mean", num(r.output.mean)}, {"median", num(r.output.median)}}},
                            {"cost", {{"mean", num(r.cost.mean)}, {"median", num(r.cost.median)}}}};
    };
    return {{"records", records.size()},
            {"skipped", skipped},
            {"without", row(without)},
            {"with", row(with)},
            {"ratio", row(ratio)},
            {"diagnostics", diagnostics}};
  }

  [[nodiscard]] std::string to_text() const {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof buf, "%-11s | %12s %12s | %12s %12s | %12s %12s\n", "Pre-process", "input mean",
                  "input median", "output mean", "output median", "cost mean", "cost median");
    out += buf;
    for (const OverheadRow* r : {&without, &with}) {
      std::snprintf(buf, sizeof buf, "%-11s | %12.1f %12.1f | %12.1f %12.1f | %12.3e %12.3e\n", r->name.c_str(),
                    r->input.mean, r->input.median, r->output.mean, r->output.median, r->cost.mean, r->cost.median);
      out += buf;
    }
    auto pct = [](double v) {
      char b[32];
      if (std::isfinite(v)) std::snprintf(b, sizeof b, "%.2f%%", v * 100.0);
      else std::snprintf(b, sizeof b, "n/a");
      return std::string(b);
    };
    std::snprintf(buf, sizeof buf, "%-11s | %12s %12s | %12s %12s | %12s %12s\n", "Ratio", pct(ratio.input.mean).c_str(),
                  pct(ratio.input.median).c_str(), pct(ratio.output.mean).c_str(), pct(ratio.output.median).c_str(),
                  pct(ratio.cost.mean).c_str(), pct(ratio.cost.median).c_str());
    out += buf;
    return out;
  }
};

inline OverheadStats mean_median(std::vector<double> v) {
  OverheadStats s;
  if (v.empty()) return s;
  double sum = 0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
  return s;
}

/// Input/output token lengths and per-record cost without preprocessing
/// (raw HTML in, ground-truth markdown out) and with it (simplified HTML in,
/// label JSON out).
inline OverheadReport overhead_report(const std::vector<BenchmarkRecord>& records, const OverheadOptions& options = {}) {
  const Tokenizer& tok = options.tokenizer ? *options.tokenizer : default_tokenizer();
  const HeuristicClassifier heuristic;
  const Classifier& classifier = options.classifier ? *options.classifier : heuristic;
  std::vector<std::optional<OverheadRecord>> rows(records.size());
  std::vector<std::string> errors(records.size());
  detail::parallel_for(records.size(), options.jobs, [&](std::size_t i) {
    const BenchmarkRecord& rec = records[i];
    try {
      const DocumentPair pair = build_document_pair(rec.html, options.simplify, tok);
      OverheadRecord r;
      r.track_id = rec.track_id;
      r.input_without = static_cast<double>(tok.count(rec.html));
      r.output_without = static_cast<double>(tok.count(rec.convert_main_content));
      r.input_with = static_cast<double>(pair.simplified_token_count);
      r.output_with = static_cast<double>(tok.count(to_json_string(classifier.classify(pair))));
      r.cost_without = estimate_cost({options.L, options.d, r.input_without, r.output_without});
      r.cost_with = estimate_cost({options.L, options.d, r.input_with, r.output_with});
      rows[i] = r;
    } catch (const std::exception& e) {
      errors[i] = rec.track_id + ": " + e.what();
    }
  });
  OverheadReport report;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i]) {
      report.records.push_back(*rows[i]);
    } else {
      ++report.skipped;
      report.diagnostics.push_back(errors[i]);
    }
  }
  auto column = [&](double OverheadRecord::*field) {
    std::vector<double> v;
    for (const auto& r : report.records) v.push_back(r.*field);
    return mean_median(std::move(v));
  };
  report.without.input = column(&OverheadRecord::input_without);
  report.without.output = column(&OverheadRecord::output_without);
  report.without.cost = column(&OverheadRecord::cost_without);
  report.with.input = column(&OverheadRecord::input_with);
  report.with.output = column(&OverheadRecord::output_with);
  report.with.cost = column(&OverheadRecord::cost_with);
  auto div = [](double a, double b) { return b != 0 ? a / b : std::nan(""); };
  auto ratio = [&](const OverheadStats& w, const OverheadStats& wo) {
    return OverheadStats{div(w.mean, wo.mean), div(w.median, wo.median)};
  };
  report.ratio.input = ratio(report.with.input, report.without.input);
  report.ratio.output = ratio(report.with.output, report.without.output);
  report.ratio.cost = ratio(report.with.cost, report.without.cost);
  return report;
}

}  // namespace dripper
