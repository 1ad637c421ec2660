#pragma once

// Command-line front end. Kept in a header so the tests can drive it in
// process; tools/dripper_cli.cpp only forwards main().

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dripper/benchmark.hpp"
#include "dripper/classifier.hpp"
#include "dripper/detail/parallel.hpp"
#include "dripper/error.hpp"
#include "dripper/evaluate.hpp"
#include "dripper/labels.hpp"
#include "dripper/pipeline.hpp"
#include "dripper/preprocess.hpp"
#include "dripper/remote.hpp"

namespace dripper {

enum class ClassifierKind { Heuristic, Remote, Mock };
enum class OutputFormat { Markdown, MainHtml, Labels, Json };

/// Settings that may come from a config file. Flags on the command line
/// override them.
struct RunConfig {
  SimplifyConfig simplify;
  RemoteConfig remote;
  std::optional<std::size_t> context_limit;
  std::optional<std::string> fallback_command;
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  RunConfig c;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const nlohmann::json& v = it.value();
      if (key == "simplify") {
        c.simplify = simplify_config_from_json(v);
      } else if (key == "context_limit") {
        const auto limit = v.get<long long>();
        if (limit < 1) throw Error(ErrorCode::InvalidConfig, "context_limit must be >= 1");
        c.context_limit = static_cast<std::size_t>(limit);
      } else if (key == "fallback_command") {
        c.fallback_command = v.get<std::string>();
      } else if (key == "remote") {
        if (!v.is_object()) throw Error(ErrorCode::InvalidConfig, "remote must be an object");
        for (auto r = v.begin(); r != v.end(); ++r) {
          const std::string& k = r.key();
          if (k == "endpoint") c.remote.endpoint = r->get<std::string>();
          else if (k == "model") c.remote.model = r->get<std::string>();
          else if (k == "api_key_env") c.remote.api_key_env = r->get<std::string>();
          else if (k == "timeout_ms") c.remote.timeout = std::chrono::milliseconds(r->get<long long>());
          else if (k == "max_retries") c.remote.max_retries = r->get<std::size_t>();
          else if (k == "backoff_base_ms") c.remote.backoff_base = std::chrono::milliseconds(r->get<long long>());
          else if (k == "backoff_cap_ms") c.remote.backoff_cap = std::chrono::milliseconds(r->get<long long>());
          else if (k == "temperature") c.remote.temperature = r->get<double>();
          else throw Error(ErrorCode::InvalidConfig, "unknown remote key `" + k + "`");
        }
      } else {
        throw Error(ErrorCode::InvalidConfig, "unknown config key `" + key + "`");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad config value: ") + e.what());
  }
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot read config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path + ": " + e.what());
  }
  return run_config_from_json(j);
}

namespace detail::cli {

inline std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) throw Error(ErrorCode::UnreadableFile, path + " is a directory");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Document {
  std::string id;
  std::string html;
};

inline bool is_html_file(const std::filesystem::path& p) {
  const std::string ext = ascii_lower(p.extension().string());
  return ext == ".html" || ext == ".htm" || ext == ".xhtml";
}

// A directory of HTML files (sorted by name) or a benchmark file.
inline std::vector<Document> batch_inputs(const std::string& path) {
  std::vector<Document> docs;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(path)) {
      if (e.is_regular_file() && is_html_file(e.path())) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) docs.push_back({f.filename().string(), read_input(f.string())});
    return docs;
  }
  for (auto& r : load_benchmark(path).records) docs.push_back({r.track_id, std::move(r.html)});
  return docs;
}

inline nlohmann::json result_json(const ExtractionResult& r) {
  nlohmann::json j;
  j["markdown"] = r.markdown;
  j["main_html"] = r.main_html;
  j["labels"] = r.labels.empty() ? nlohmann::json() : nlohmann::json::parse(to_json_string(r.labels));
  j["oversize"] = r.oversize;
  j["used_fallback"] = r.used_fallback;
  j["n_blocks"] = r.n_blocks;
  j["simplified_token_count"] = r.simplified_token_count;
  j["diagnostics"] = r.diagnostics;
  return j;
}

inline std::string render(const ExtractionResult& r, OutputFormat format) {
  switch (format) {
    case OutputFormat::Markdown: return r.markdown.empty() ? "" : r.markdown + "\n";
    case OutputFormat::MainHtml: return r.main_html.empty() ? "" : r.main_html + "\n";
    case OutputFormat::Labels: return to_json_string(r.labels) + "\n";
    case OutputFormat::Json: return result_json(r).dump() + "\n";
  }
  return "";
}

}  // namespace detail::cli

/// Entry point shared by the executable and the tests. Returns the exit
/// status: 0 success, 2 oversize without fallback, 1 any error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Main-content extraction from HTML pages", "dripper"};
  app.require_subcommand(1);

  ClassifierKind classifier_kind = ClassifierKind::Heuristic;
  std::optional<std::size_t> context_limit;
  bool fallback = false;
  std::string fallback_cmd;
  long long fallback_timeout_ms = 30000;
  std::string config_path;
  OutputFormat format = OutputFormat::Markdown;
  bool json = false;
  bool oracle = false;
  bool per_record = false;
  std::size_t jobs = 1;
  std::string endpoint, model;
  std::string input;

  const std::map<std::string, ClassifierKind> kinds{
      {"heuristic", ClassifierKind::Heuristic}, {"remote", ClassifierKind::Remote}, {"mock", ClassifierKind::Mock}};
  const std::map<std::string, OutputFormat> formats{{"markdown", OutputFormat::Markdown},
                                                    {"main_html", OutputFormat::MainHtml},
                                                    {"labels", OutputFormat::Labels},
                                                    {"json", OutputFormat::Json}};

  auto add_pipeline_options = [&](CLI::App* cmd) {
    cmd->add_option("--classifier", classifier_kind, "block labeler (default heuristic)")
        ->transform(CLI::CheckedTransformer(kinds, CLI::ignore_case).description(""))
        ->option_text("heuristic|remote|mock");
    cmd->add_option("--context-limit", context_limit, "token budget for the simplified page")
        ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
    cmd->add_flag("--fallback", fallback, "send oversize or empty results to the fallback extractor");
    cmd->add_option("--fallback-cmd", fallback_cmd, "shell command used as fallback (reads HTML on stdin)");
    cmd->add_option("--fallback-timeout", fallback_timeout_ms, "fallback command timeout in ms")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--endpoint", endpoint, "chat-completion endpoint for --classifier remote");
    cmd->add_option("--model", model, "model name for --classifier remote");
    cmd->add_option("--jobs", jobs, "worker threads for batch work")->check(CLI::Range(std::size_t{1}, std::size_t{256}));
  };

  CLI::App* extract_cmd = app.add_subcommand("extract", "extract the main content of a page, a directory or a JSONL file");
  add_pipeline_options(extract_cmd);
  extract_cmd->add_option("input", input, "HTML file, directory, benchmark JSONL, or - for stdin");
  extract_cmd->add_option("--format", format, "output format (default markdown)")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case).description(""))
      ->option_text("markdown|main_html|labels|json");

  CLI::App* eval_cmd = app.add_subcommand("eval", "score a benchmark file (ROUGE-5 F1 by stratum)");
  add_pipeline_options(eval_cmd);
  eval_cmd->add_option("benchmark", input, "benchmark JSONL or JSON array")->required();
  eval_cmd->add_flag("--json", json, "machine-readable report");
  eval_cmd->add_flag("--oracle", oracle, "replay the ground-truth markdown instead of extracting");
  eval_cmd->add_flag("--per-record", per_record, "include per-record scores in the JSON report");

  CLI::App* overhead_cmd = app.add_subcommand("overhead", "token length and cost with and without preprocessing");
  add_pipeline_options(overhead_cmd);
  overhead_cmd->add_option("benchmark", input, "benchmark JSONL or JSON array")->required();
  overhead_cmd->add_flag("--json", json, "machine-readable report");

  CLI::App* inspect_cmd = app.add_subcommand("inspect", "show blocks, labels and the simplified page");
  add_pipeline_options(inspect_cmd);
  inspect_cmd->add_option("input", input, "HTML file or - for stdin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "dripper: " << e.what() << "\n";
    return 1;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (const char* env = std::getenv("DRIPPER_ENDPOINT"); env && *env) config.remote.endpoint = env;
    if (!endpoint.empty()) config.remote.endpoint = endpoint;
    if (!model.empty()) config.remote.model = model;

    ExtractOptions options;
    options.simplify = config.simplify;
    options.context_limit = context_limit.value_or(config.context_limit.value_or(kDefaultContextLimit));
    const std::string command = !fallback_cmd.empty() ? fallback_cmd : config.fallback_command.value_or("");
    options.fallback = fallback || !fallback_cmd.empty();
    if (!command.empty()) options.fallback_options.command = {"/bin/sh", "-c", command};
    options.fallback_options.timeout = std::chrono::milliseconds(fallback_timeout_ms);

    std::unique_ptr<Classifier> classifier;
    switch (classifier_kind) {
      case ClassifierKind::Heuristic: classifier = std::make_unique<HeuristicClassifier>(); break;
      case ClassifierKind::Mock:
        classifier = std::make_unique<MockModelClassifier>(ConstrainedDecodeOptions{options.context_limit});
        break;
      case ClassifierKind::Remote: classifier = std::make_unique<RemoteClassifier>(config.remote); break;
    }

    if (*extract_cmd) {
      std::error_code ec;
      const bool batch = !input.empty() && input != "-" &&
                         (std::filesystem::is_directory(input, ec) || input.ends_with(".jsonl") || input.ends_with(".json"));
      if (!batch) {
        const ExtractionResult r = extract(detail::cli::read_input(input), *classifier, options);
        for (const auto& d : r.diagnostics) err << "dripper: " << d << "\n";
        if (r.oversize && !r.used_fallback) return 2;
        out << detail::cli::render(r, format);
        return 0;
      }
      // Batch: one JSON line per document, in input order.
      const auto docs = detail::cli::batch_inputs(input);
      std::vector<nlohmann::json> lines(docs.size());
      std::vector<int> status(docs.size(), 0);
      detail::parallel_for(docs.size(), jobs, [&](std::size_t i) {
        nlohmann::json j;
        try {
          const ExtractionResult r = extract(docs[i].html, *classifier, options);
          j = detail::cli::result_json(r);
          status[i] = r.oversize && !r.used_fallback ? 2 : 0;
        } catch (const std::exception& e) {
          j["error"] = e.what();
          status[i] = 1;
        }
        j["id"] = docs[i].id;
        lines[i] = std::move(j);
      });
      int code = 0;
      for (std::size_t i = 0; i < docs.size(); ++i) {
        out << lines[i].dump() << "\n";
        if (status[i] == 1) err << "dripper: " << docs[i].id << ": " << lines[i]["error"].get<std::string>() << "\n";
        code = std::max(code, status[i] == 1 ? 3 : status[i]);
      }
      return code == 3 ? 1 : code;
    }

    if (*eval_cmd) {
      const BenchmarkSet bench = load_benchmark(input);
      for (const auto& d : bench.diagnostics) err << "dripper: skipped " << d << "\n";
      EvalOptions eval_options;
      eval_options.jobs = jobs;
      const Extractor extractor = oracle ? oracle_extractor() : pipeline_extractor(*classifier, options);
      const EvalReport report = evaluate_run(bench.records, extractor, eval_options);
      if (json) {
        nlohmann::json j = report.to_json(per_record);
        j["skipped"] = bench.skipped;
        out << j.dump(2) << "\n";
      } else {
        out << report.to_text();
      }
      return 0;
    }

    if (*overhead_cmd) {
      const BenchmarkSet bench = load_benchmark(input);
      for (const auto& d : bench.diagnostics) err << "dripper: skipped " << d << "\n";
      OverheadOptions overhead;
      overhead.simplify = options.simplify;
      overhead.classifier = classifier.get();
      overhead.jobs = jobs;
      const OverheadReport report = overhead_report(bench.records, overhead);
      for (const auto& d : report.diagnostics) err << "dripper: " << d << "\n";
      out << (json ? report.to_json().dump(2) + "\n" : report.to_text());
      return 0;
    }

    if (*inspect_cmd) {
      const DocumentPair pair = build_document_pair(detail::cli::read_input(input), options.simplify);
      std::optional<LabelSequence> labels;
      if (pair.simplified_token_count <= options.context_limit) {
        labels = classifier->classify(pair);
      } else {
        err << "dripper: oversize: " << pair.simplified_token_count << " tokens > " << options.context_limit
            << ", not classified\n";
      }
      for (std::size_t i = 0; i < pair.blocks.size(); ++i) {
        const Block& b = pair.blocks[i];
        const std::string preview(std::string_view(b.text).substr(0, detail::byte_offset_of(b.text, 80)));
        out << b.id << " [" << b.tag << "] " << preview;
        if (b.truncated) out << " (truncated)";
        out << " → " << (labels ? std::string(to_string((*labels)[i])) : std::string("?")) << "\n";
      }
      out << "-- simplified, " << pair.simplified_token_count << " tokens --\n" << pair.simplified << "\n";
      return 0;
    }
  } catch (const Error& e) {
    err << "dripper: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "dripper: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace dripper
