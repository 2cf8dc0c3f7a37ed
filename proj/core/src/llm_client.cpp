#include "mot/llm_client.hpp"

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <random>
#include <thread>

namespace mot {

using json = nlohmann::json;

std::string_view provider_error_kind_name(ProviderErrorKind kind) {
  switch (kind) {
    case ProviderErrorKind::TransientExhausted: return "TransientExhausted";
    case ProviderErrorKind::Auth: return "Auth";
    case ProviderErrorKind::BadRequest: return "BadRequest";
    case ProviderErrorKind::MissingFixture: return "MissingFixture";
    case ProviderErrorKind::Protocol: return "Protocol";
  }
  return "Protocol";
}

ProviderError::ProviderError(ProviderErrorKind kind, const std::string& detail, int attempts)
    : Error("provider error (" + std::string(provider_error_kind_name(kind)) + "): " + detail),
      kind_(kind),
      attempts_(attempts) {}

std::string fixture_key(const ChatRequest& request) {
  // Canonical form: ["model", [["role", "content"], ...]]
  json canonical = json::array();
  canonical.push_back(request.model);
  json msgs = json::array();
  for (const auto& m : request.messages) msgs.push_back({std::string(role_name(m.role)), m.content});
  canonical.push_back(std::move(msgs));
  const std::string bytes = canonical.dump();

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

std::string record_fixture(FixtureStore& store, const ChatRequest& request,
                           const ChatResponse& response, bool overwrite) {
  auto key = fixture_key(request);
  store.save(key, FixtureEntry{response.content, response.usage}, overwrite);
  return key;
}

ReplayClient::ReplayClient(std::shared_ptr<const FixtureStore> store) : store_(std::move(store)) {}

ChatResponse ReplayClient::complete(const ChatRequest& request) {
  auto key = fixture_key(request);
  auto entry = store_->load(key);
  if (!entry) {
    throw ProviderError(ProviderErrorKind::MissingFixture,
                        "no fixture " + key + " in " + store_->dir().string());
  }
  ChatResponse r;
  r.content = std::move(entry->content);
  r.usage = entry->usage;
  r.attempts = 1;
  return r;
}

RecordingClient::RecordingClient(std::shared_ptr<ChatClient> upstream,
                                 std::shared_ptr<FixtureStore> store, bool overwrite)
    : upstream_(std::move(upstream)), store_(std::move(store)), overwrite_(overwrite) {}

ChatResponse RecordingClient::complete(const ChatRequest& request) {
  auto response = upstream_->complete(request);
  record_fixture(*store_, request, response, overwrite_);
  return response;
}

// --- live -----------------------------------------------------------------

LiveClient::LiveClient(ProviderConfig config, std::shared_ptr<HttpTransport> transport,
                       BackoffPolicy backoff, Sleeper sleeper, EnvLookup env)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      backoff_(backoff),
      sleeper_(std::move(sleeper)),
      env_(std::move(env)) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (!env_) {
    env_ = [](const std::string& name) -> std::optional<std::string> {
      const char* v = std::getenv(name.c_str());
      if (!v || !*v) return std::nullopt;
      return std::string(v);
    };
  }
}

std::string LiveClient::request_body(const ChatRequest& request) {
  json body;
  body["model"] = request.model;
  json msgs = json::array();
  for (const auto& m : request.messages) {
    msgs.push_back({{"role", std::string(role_name(m.role))}, {"content", m.content}});
  }
  body["messages"] = std::move(msgs);
  if (request.max_output_tokens) body["max_tokens"] = *request.max_output_tokens;
  return body.dump();
}

std::chrono::milliseconds LiveClient::backoff_delay(const BackoffPolicy& policy, int retry) {
  double ms = static_cast<double>(policy.initial.count());
  for (int i = 0; i < retry; ++i) ms *= policy.multiplier;
  ms = std::min(ms, static_cast<double>(policy.cap.count()));
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

namespace {

bool is_transient(const HttpResult& r) {
  return r.status == 0 || r.status == 408 || r.status == 409 || r.status == 429 || r.status >= 500;
}

ChatResponse decode_completion(const std::string& body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ProviderError(ProviderErrorKind::Protocol, "response is not a JSON object");
  }
  ChatResponse r;
  auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) {
    throw ProviderError(ProviderErrorKind::Protocol, "response has no choices");
  }
  const auto& message = (*choices)[0].value("message", json::object());
  if (auto c = message.find("content"); c != message.end() && c->is_string()) {
    r.content = c->get<std::string>();
  }
  if (auto u = doc.find("usage"); u != doc.end() && u->is_object()) {
    r.usage.in_tokens = std::max<std::int64_t>(0, u->value("prompt_tokens", std::int64_t{0}));
    r.usage.out_tokens = std::max<std::int64_t>(0, u->value("completion_tokens", std::int64_t{0}));
  }
  return r;
}

}  // namespace

ChatResponse LiveClient::complete(const ChatRequest& request) {
  auto key = env_(config_.api_key_env);
  if (!key) {
    throw ProviderError(ProviderErrorKind::Auth,
                        "environment variable " + config_.api_key_env + " is not set");
  }
  if (request.messages.empty()) {
    throw ProviderError(ProviderErrorKind::BadRequest, "request has no messages");
  }
  auto url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/chat/completions";
  const std::map<std::string, std::string> headers = {
      {"Authorization", "Bearer " + *key}, {"Content-Type", "application/json"}};
  const auto body = request_body(request);

  std::mt19937 rng(std::random_device{}());
  std::string last_error;
  const int max_attempts = std::max(0, config_.max_retries) + 1;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    auto start = std::chrono::steady_clock::now();
    auto result = transport_->post(url, headers, body, config_.request_timeout);
    auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    if (result.status >= 200 && result.status < 300) {
      auto response = decode_completion(result.body);
      response.latency = latency;
      response.attempts = attempt;
      return response;
    }
    if (result.status == 401 || result.status == 403) {
      throw ProviderError(ProviderErrorKind::Auth, "HTTP " + std::to_string(result.status), attempt);
    }
    if (!is_transient(result)) {
      throw ProviderError(ProviderErrorKind::BadRequest,
                          "HTTP " + std::to_string(result.status) + ": " + result.body.substr(0, 500),
                          attempt);
    }
    last_error = result.status == 0 ? result.transport_error : "HTTP " + std::to_string(result.status);
    if (attempt == max_attempts) break;
    auto delay = backoff_delay(backoff_, attempt - 1);
    if (backoff_.jitter && delay.count() > 0) {
      std::uniform_real_distribution<double> dist(0.5, 1.0);
      delay = std::chrono::milliseconds(static_cast<long long>(delay.count() * dist(rng)));
    }
    sleeper_(delay);
  }
  throw ProviderError(ProviderErrorKind::TransientExhausted, last_error, max_attempts);
}

// --- scripted -------------------------------------------------------------

ScriptedClient::ScriptedClient(std::vector<Reply> replies) : replies_(std::move(replies)) {}

ChatResponse ScriptedClient::complete(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  requests_.push_back(request);
  if (next_ >= replies_.size()) {
    throw ProviderError(ProviderErrorKind::MissingFixture, "scripted replies exhausted");
  }
  const auto& reply = replies_[next_++];
  ChatResponse r;
  r.content = reply.content;
  r.usage = reply.usage;
  return r;
}

std::size_t ScriptedClient::remaining() const {
  std::lock_guard lock(mutex_);
  return replies_.size() - next_;
}

}  // namespace mot
