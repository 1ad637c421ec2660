#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "dripper/classifier.hpp"
#include "dripper/error.hpp"
#include "dripper/labels.hpp"
#include "dripper/preprocess.hpp"
#include "dripper/prompt.hpp"

namespace dripper {

struct RemoteConfig {
  std::string endpoint = "https://api.deepseek.com/chat/completions";
  std::string model = "deepseek-chat";
  std::string api_key_env = "DRIPPER_API_KEY";
  std::chrono::milliseconds timeout{60000};
  std::size_t max_retries = 3;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{8000};
  double temperature = 0.0;
};

struct HttpReply {
  bool transport_ok = false;
  int status = 0;
  std::string body;
  std::string error;
};

/// One HTTP POST. Separated out so tests can script failures.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  [[nodiscard]] virtual HttpReply post(const RemoteConfig& config, const std::string& json_body,
                                       const std::optional<std::string>& api_key) const = 0;
};

struct EndpointParts {
  std::string base;  // scheme://host[:port]
  std::string path;
};

inline EndpointParts split_endpoint(std::string_view url) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string_view::npos) throw Error(ErrorCode::InvalidConfig, "endpoint needs a scheme: " + std::string(url));
  const std::size_t slash = url.find('/', scheme + 3);
  if (slash == std::string_view::npos) return {std::string(url), "/"};
  return {std::string(url.substr(0, slash)), std::string(url.substr(slash))};
}

class HttplibTransport final : public ChatTransport {
 public:
  [[nodiscard]] HttpReply post(const RemoteConfig& config, const std::string& json_body,
                               const std::optional<std::string>& api_key) const override {
    const EndpointParts parts = split_endpoint(config.endpoint);
    // A client per call keeps the transport stateless across threads.
    httplib::Client client(parts.base);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (api_key) headers.emplace("Authorization", "Bearer " + *api_key);
    auto res = client.Post(parts.path, headers, json_body, "application/json");
    HttpReply reply;
    if (!res) {
      reply.error = httplib::to_string(res.error());
      return reply;
    }
    reply.transport_ok = true;
    reply.status = res->status;
    reply.body = res->body;
    return reply;
  }
};

/// Balanced-brace scan for the first substring that parses as a JSON object.
/// Braces inside string literals are skipped.
inline std::optional<nlohmann::json> extract_first_json_object(std::string_view text) {
  for (std::size_t start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        auto parsed = nlohmann::json::parse(text.substr(start, i - start + 1), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) return parsed;
        break;
      }
    }
  }
  return std::nullopt;
}

struct ParsedReply {
  LabelSequence labels;
  std::vector<std::string> diagnostics;  // one entry per repair
};

/// Maps a model reply onto labels 1..n. Missing keys and unknown values
/// become other, extra keys are ignored; each repair leaves a diagnostic.
inline ParsedReply parse_label_reply(std::string_view reply, std::size_t n) {
  const auto object = extract_first_json_object(reply);
  if (!object) throw Error(ErrorCode::MalformedReply, "no JSON object in reply");
  ParsedReply out;
  out.labels.labels.assign(n, BlockLabel::Other);
  for (std::size_t i = 1; i <= n; ++i) {
    const std::string key = std::to_string(i);
    const auto it = object->find(key);
    if (it == object->end()) {
      out.diagnostics.push_back("missing key " + key + " -> other");
      continue;
    }
    if (it->is_string() && it->get<std::string>() == kMainLiteral) {
      out.labels.labels[i - 1] = BlockLabel::Main;
    } else if (!(it->is_string() && it->get<std::string>() == kOtherLiteral)) {
      out.diagnostics.push_back("unknown value for key " + key + ": " + it->dump() + " -> other");
    }
  }
  for (const auto& [key, value] : object->items()) {
    bool expected = false;
    if (!key.empty() && key.size() <= 20 && key.find_first_not_of("0123456789") == std::string::npos && key[0] != '0') {
      const unsigned long long k = std::stoull(key);
      expected = k >= 1 && k <= n;
    }
    if (!expected) out.diagnostics.push_back("ignored extra key " + key);
  }
  return out;
}

inline nlohmann::json chat_request_body(const RemoteConfig& config, const std::string& prompt) {
  return {{"model", config.model},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
          {"temperature", config.temperature},
          {"stream", false}};
}

inline std::string chat_reply_content(const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::MalformedReply, "response body is not JSON");
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::MalformedReply, "response lacks choices[0].message.content");
  }
}

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline std::chrono::milliseconds backoff_delay(const RemoteConfig& config, std::size_t attempt) {
  auto delay = config.backoff_base;
  for (std::size_t i = 0; i < attempt && delay < config.backoff_cap; ++i) delay *= 2;
  return std::min(delay, config.backoff_cap);
}

class RemoteClassifier final : public Classifier {
 public:
  explicit RemoteClassifier(RemoteConfig config, std::shared_ptr<const ChatTransport> transport = nullptr,
                            Sleeper sleeper = nullptr)
      : config_(std::move(config)),
        transport_(transport ? std::move(transport) : std::make_shared<HttplibTransport>()),
        sleeper_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })) {}

  [[nodiscard]] LabelSequence classify(const DocumentPair& doc) const override { return classify_detailed(doc).labels; }
  [[nodiscard]] std::string_view name() const override { return "remote"; }

  /// Sends the prompt, retrying transport failures, 429 and 5xx with
  /// exponential backoff.
  [[nodiscard]] ParsedReply classify_detailed(const DocumentPair& doc) const {
    const std::string body = chat_request_body(config_, build_prompt(doc.simplified, doc.item_attribute_name)).dump();
    std::optional<std::string> key;
    if (!config_.api_key_env.empty()) {
      if (const char* v = std::getenv(config_.api_key_env.c_str()); v != nullptr && *v != '\0') key = v;
    }
    std::string last_error;
    for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) sleeper_(backoff_delay(config_, attempt - 1));
      const HttpReply reply = transport_->post(config_, body, key);
      if (!reply.transport_ok) {
        last_error = "transport error: " + reply.error;
        continue;
      }
      if (reply.status == 429 || reply.status >= 500) {
        last_error = "HTTP " + std::to_string(reply.status);
        continue;
      }
      if (reply.status < 200 || reply.status >= 300) {
        throw Error(ErrorCode::RemoteUnavailable, "HTTP " + std::to_string(reply.status) + ": " + reply.body.substr(0, 200));
      }
      return parse_label_reply(chat_reply_content(reply.body), doc.n_blocks);
    }
    throw Error(ErrorCode::RemoteUnavailable,
                "gave up after " + std::to_string(config_.max_retries + 1) + " attempts (" + last_error + ")");
  }

  [[nodiscard]] const RemoteConfig& config() const { return config_; }

 private:
  RemoteConfig config_;
  std::shared_ptr<const ChatTransport> transport_;
  Sleeper sleeper_;
};

inline LabelSequence classify_remote(const RemoteConfig& config, const DocumentPair& doc) {
  return RemoteClassifier(config).classify(doc);
}

}  // namespace dripper
