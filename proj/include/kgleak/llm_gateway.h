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

#ifndef KGLEAK_LLM_GATEWAY_H_
#define KGLEAK_LLM_GATEWAY_H_

#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace kgleak {

struct GatewayConfig {
  // Full URL of an OpenAI-compatible chat-completions endpoint.
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model_name = "gpt-4o-mini";
  // Name of the environment variable holding the API key.
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.2;
  int max_tokens = 200;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{500};
};

void Validate(const GatewayConfig& cfg);

struct ChatRequest {
  std::string model;
  std::string system;
  std::string user;
  double temperature = 0.0;
  int max_tokens = 0;

  // OpenAI-compatible request body.
  std::string ToJson() const;
};

struct TransportReply {
  int status = 0;          // HTTP status; 0 when no response arrived
  std::string body;
  std::string error;       // transport-level failure description
};

// One HTTP round trip. Implementations must be safe to call from several
// threads on independent requests.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual TransportReply Post(const GatewayConfig& cfg,
                              const std::string& api_key,
                              const std::string& body) = 0;
};

// cpp-httplib client for http:// and https:// endpoints.
class HttpTransport : public ChatTransport {
 public:
  TransportReply Post(const GatewayConfig& cfg, const std::string& api_key,
                      const std::string& body) override;
};

// Replays a fixed script; used by tests and offline runs.
class ScriptedTransport : public ChatTransport {
 public:
  ScriptedTransport& Reply(std::string content);
  ScriptedTransport& Fail(int status, std::string error = "scripted failure");
  ScriptedTransport& Timeout();
  // Reused once the script is exhausted. Without it an exhausted script
  // behaves like a dead connection.
  ScriptedTransport& OtherwiseReply(std::string content);

  TransportReply Post(const GatewayConfig& cfg, const std::string& api_key,
                      const std::string& body) override;

  int calls() const;
  std::string last_body() const;

 private:
  mutable std::mutex mu_;
  std::deque<TransportReply> script_;
  std::optional<TransportReply> otherwise_;
  int calls_ = 0;
  std::string last_body_;
};

struct ChatExchange {
  std::string system;
  std::string user;
  std::string reply;  // empty only when the call failed
  std::chrono::milliseconds latency{0};
  int attempt_count = 0;
  bool ok = false;
  std::string error;
};

// Append-only JSONL transcript. Each exchange is flushed before Complete
// returns it.
class TranscriptWriter {
 public:
  explicit TranscriptWriter(const std::filesystem::path& path);
  void Write(const ChatExchange& exchange, double temperature);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

class LlmGateway {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  LlmGateway(GatewayConfig cfg, std::shared_ptr<ChatTransport> transport,
             TranscriptWriter* transcript = nullptr, Sleeper sleeper = {});

  // Single chat completion with exponential backoff on transient failures
  // (network errors, 408, 429, 5xx). 401 and 403 fail immediately.
  ChatExchange Complete(const std::string& system, const std::string& user,
                        std::optional<double> temperature = std::nullopt);

  const GatewayConfig& config() const { return cfg_; }

 private:
  GatewayConfig cfg_;
  std::shared_ptr<ChatTransport> transport_;
  TranscriptWriter* transcript_;
  Sleeper sleeper_;
};

// Extracts choices[0].message.content from a chat-completions response.
std::optional<std::string> ParseChatContent(const std::string& body);

}  // namespace kgleak

#endif  // KGLEAK_LLM_GATEWAY_H_
