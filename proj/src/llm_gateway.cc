// Copyright 2026 The kgleak Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kgleak/llm_gateway.h"

#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace kgleak {

using nlohmann::json;

void Validate(const GatewayConfig& cfg) {
  if (cfg.timeout.count() <= 0) {
    throw std::invalid_argument("gateway timeout must be positive");
  }
  if (cfg.max_retries < 0) {
    throw std::invalid_argument("gateway max_retries must be >= 0");
  }
}

std::string ChatRequest::ToJson() const {
  nlohmann::ordered_json body;
  body["model"] = model;
  body["messages"] = nlohmann::ordered_json::array(
      {{{"role", "system"}, {"content", system}},
       {{"role", "user"}, {"content", user}}});
  body["temperature"] = temperature;
  body["max_tokens"] = max_tokens;
  return body.dump();
}

std::optional<std::string> ParseChatContent(const std::string& body) {
  const json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) return std::nullopt;
  try {
    const json& content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) return std::nullopt;
    return content.get<std::string>();
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

TransportReply HttpTransport::Post(const GatewayConfig& cfg,
                                   const std::string& api_key,
                                   const std::string& body) {
  // scheme://host[:port]/path
  const std::size_t scheme_end = cfg.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    return {0, "", "endpoint is not an absolute URL: " + cfg.endpoint};
  }
  const std::size_t path_start = cfg.endpoint.find('/', scheme_end + 3);
  const std::string origin = cfg.endpoint.substr(0, path_start);
  const std::string path = path_start == std::string::npos
                               ? "/"
                               : cfg.endpoint.substr(path_start);

  httplib::Client client(origin);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
      cfg.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

  auto result = client.Post(path, headers, body, "application/json");
  if (!result) {
    return {0, "", "transport error: " + httplib::to_string(result.error())};
  }
  return {result->status, result->body, ""};
}

ScriptedTransport& ScriptedTransport::Reply(std::string content) {
  json body = {{"choices", json::array({{{"message",
                                          {{"role", "assistant"},
                                           {"content", std::move(content)}}}}})}};
  std::lock_guard<std::mutex> lock(mu_);
  script_.push_back({200, body.dump(), ""});
  return *this;
}

ScriptedTransport& ScriptedTransport::Fail(int status, std::string error) {
  std::lock_guard<std::mutex> lock(mu_);
  script_.push_back({status, "", std::move(error)});
  return *this;
}

ScriptedTransport& ScriptedTransport::Timeout() {
  std::lock_guard<std::mutex> lock(mu_);
  script_.push_back({0, "", "timeout"});
  return *this;
}

ScriptedTransport& ScriptedTransport::OtherwiseReply(std::string content) {
  ScriptedTransport tmp;
  tmp.Reply(std::move(content));
  std::lock_guard<std::mutex> lock(mu_);
  otherwise_ = tmp.script_.front();
  return *this;
}

TransportReply ScriptedTransport::Post(const GatewayConfig&, const std::string&,
                                       const std::string& body) {
  std::lock_guard<std::mutex> lock(mu_);
  ++calls_;
  last_body_ = body;
  if (script_.empty()) {
    if (otherwise_) return *otherwise_;
    return {0, "", "script exhausted"};
  }
  TransportReply next = std::move(script_.front());
  script_.pop_front();
  return next;
}

int ScriptedTransport::calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return calls_;
}

std::string ScriptedTransport::last_body() const {
  std::lock_guard<std::mutex> lock(mu_);
  return last_body_;
}

TranscriptWriter::TranscriptWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary | std::ios::app) {
  if (!out_) throw std::runtime_error("cannot open transcript " + path.string());
}

void TranscriptWriter::Write(const ChatExchange& exchange, double temperature) {
  nlohmann::ordered_json line;
  line["system"] = exchange.system;
  line["user"] = exchange.user;
  line["reply"] = exchange.reply;
  line["ok"] = exchange.ok;
  line["error"] = exchange.error;
  line["attempts"] = exchange.attempt_count;
  line["latency_ms"] = exchange.latency.count();
  line["temperature"] = temperature;
  std::lock_guard<std::mutex> lock(mu_);
  out_ << line.dump() << '\n';
  out_.flush();
}

LlmGateway::LlmGateway(GatewayConfig cfg,
                       std::shared_ptr<ChatTransport> transport,
                       TranscriptWriter* transcript, Sleeper sleeper)
    : cfg_(std::move(cfg)),
      transport_(std::move(transport)),
      transcript_(transcript),
      sleeper_(std::move(sleeper)) {
  Validate(cfg_);
  if (!transport_) throw std::invalid_argument("gateway needs a transport");
  if (!sleeper_) {
    sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

ChatExchange LlmGateway::Complete(const std::string& system,
                                  const std::string& user,
                                  std::optional<double> temperature) {
  const double temp = temperature.value_or(cfg_.temperature);
  const ChatRequest request{cfg_.model_name, system, user, temp, cfg_.max_tokens};
  const std::string body = request.ToJson();
  std::string api_key;
  if (const char* v = std::getenv(cfg_.api_key_env.c_str())) api_key = v;

  ChatExchange exchange;
  exchange.system = system;
  exchange.user = user;
  const auto start = std::chrono::steady_clock::now();
  const int max_attempts = cfg_.max_retries + 1;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    exchange.attempt_count = attempt;
    const TransportReply reply = transport_->Post(cfg_, api_key, body);
    if (reply.status == 200) {
      if (auto content = ParseChatContent(reply.body)) {
        exchange.reply = std::move(*content);
        exchange.ok = true;
        exchange.error.clear();
        break;
      }
      exchange.error = "malformed completion body";
    } else if (reply.status == 401 || reply.status == 403) {
      exchange.error = "authentication failed (HTTP " +
                       std::to_string(reply.status) + ")";
      break;
    } else if (reply.status != 0 && reply.status != 408 && reply.status != 429 &&
               reply.status < 500) {
      exchange.error = "HTTP " + std::to_string(reply.status);
      break;
    } else {
      exchange.error = reply.status == 0
                           ? reply.error
                           : "HTTP " + std::to_string(reply.status);
    }
    if (attempt < max_attempts) sleeper_(cfg_.backoff_base * (1 << (attempt - 1)));
  }
  exchange.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  if (transcript_) transcript_->Write(exchange, temp);
  return exchange;
}

}  // namespace kgleak
