#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mot/error.hpp"
#include "mot/prompt.hpp"

namespace mot {

struct Usage {
  std::int64_t in_tokens = 0;
  std::int64_t out_tokens = 0;

  Usage& operator+=(const Usage& o) {
    in_tokens += o.in_tokens;
    out_tokens += o.out_tokens;
    return *this;
  }
  friend Usage operator+(Usage a, const Usage& b) { return a += b; }
  friend bool operator==(const Usage&, const Usage&) = default;
};

/// No temperature field: requests use the provider default.
struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  std::optional<int> max_output_tokens;
};

struct ChatResponse {
  std::string content;
  Usage usage;
  std::chrono::milliseconds latency{0};
  int attempts = 1;
};

struct Pricing {
  double usd_per_input_token = 0.0;
  double usd_per_output_token = 0.0;
};

struct ProviderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string model = "gpt-4o-mini";
  std::chrono::milliseconds request_timeout{120'000};
  int max_retries = 3;
  Pricing pricing{0.15e-6, 0.60e-6};
};

enum class ProviderErrorKind { TransientExhausted, Auth, BadRequest, MissingFixture, Protocol };

std::string_view provider_error_kind_name(ProviderErrorKind kind);

class ProviderError : public Error {
 public:
  ProviderError(ProviderErrorKind kind, const std::string& detail, int attempts = 0);
  ProviderErrorKind kind() const { return kind_; }
  int attempts() const { return attempts_; }

 private:
  ProviderErrorKind kind_;
  int attempts_;
};

/// Chat-completion service. Implementations must be safe to call from
/// several threads.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Content hash over (model, ordered messages); max_output_tokens is ignored.
/// 64 lowercase hex characters.
std::string fixture_key(const ChatRequest& request);

// --- fixture store --------------------------------------------------------

enum class StoreErrorKind { Conflict, Io, Missing, Corrupt };

class StoreError : public Error {
 public:
  StoreError(StoreErrorKind kind, const std::string& detail);
  StoreErrorKind kind() const { return kind_; }

 private:
  StoreErrorKind kind_;
};

struct FixtureEntry {
  std::string content;
  Usage usage;
  friend bool operator==(const FixtureEntry&, const FixtureEntry&) = default;
};

/// Directory of recorded responses: one file per key, file name = key, body
/// {"content": str, "in_tokens": int, "out_tokens": int}.
class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  bool contains(const std::string& key) const;
  std::optional<FixtureEntry> load(const std::string& key) const;
  /// Throws StoreError{Conflict} if the key exists and overwrite is false.
  void save(const std::string& key, const FixtureEntry& entry, bool overwrite = false);
  std::vector<std::string> keys() const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
};

/// Persists the response for `request`; returns the key written.
std::string record_fixture(FixtureStore& store, const ChatRequest& request,
                           const ChatResponse& response, bool overwrite = false);

/// Serves recorded responses; never touches the network. A missing fixture
/// raises ProviderError{MissingFixture}.
class ReplayClient : public ChatClient {
 public:
  explicit ReplayClient(std::shared_ptr<const FixtureStore> store);
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<const FixtureStore> store_;
};

/// Forwards to an upstream client and records each successful response.
class RecordingClient : public ChatClient {
 public:
  RecordingClient(std::shared_ptr<ChatClient> upstream, std::shared_ptr<FixtureStore> store,
                  bool overwrite = false);
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<ChatClient> upstream_;
  std::shared_ptr<FixtureStore> store_;
  bool overwrite_;
};

// --- live protocol --------------------------------------------------------

struct HttpResult {
  int status = 0;              // 0 when the request never got a response
  std::string body;
  std::string transport_error;  // non-empty for connection failures/timeouts
};

/// Minimal HTTP POST seam so the retry logic can be exercised without a
/// network.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResult post(const std::string& url, const std::map<std::string, std::string>& headers,
                          const std::string& body, std::chrono::milliseconds timeout) = 0;
};

std::shared_ptr<HttpTransport> make_default_transport();

struct BackoffPolicy {
  std::chrono::milliseconds initial{1000};
  double multiplier = 2.0;
  std::chrono::milliseconds cap{30'000};
  bool jitter = true;
};

/// OpenAI-compatible `POST {base_url}/chat/completions` client with retries
/// on timeouts, 429 and 5xx responses.
class LiveClient : public ChatClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;
  using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

  LiveClient(ProviderConfig config, std::shared_ptr<HttpTransport> transport,
             BackoffPolicy backoff = {}, Sleeper sleeper = {}, EnvLookup env = {});

  ChatResponse complete(const ChatRequest& request) override;

  /// Request body sent for `request` (exposed for tests).
  static std::string request_body(const ChatRequest& request);

  /// Delay before retry number `retry` (0-based), without jitter.
  static std::chrono::milliseconds backoff_delay(const BackoffPolicy& policy, int retry);

 private:
  ProviderConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  BackoffPolicy backoff_;
  Sleeper sleeper_;
  EnvLookup env_;
};

/// Returns scripted replies in order and remembers every request; for tests
/// and fixture generation. Running out of replies raises
/// ProviderError{MissingFixture}.
class ScriptedClient : public ChatClient {
 public:
  struct Reply {
    std::string content;
    Usage usage;
  };
  explicit ScriptedClient(std::vector<Reply> replies);
  ChatResponse complete(const ChatRequest& request) override;

  const std::vector<ChatRequest>& requests() const { return requests_; }
  std::size_t remaining() const;

 private:
  std::vector<Reply> replies_;
  std::size_t next_ = 0;
  std::vector<ChatRequest> requests_;
  mutable std::mutex mutex_;
};

}  // namespace mot
