#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "itemlab/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "itemlab/error.hpp"
#include "itemlab/hash.hpp"
#include "itemlab/jsonl.hpp"

namespace itemlab {

namespace {

void validate_request(const PromptRequest& request) {
  if (request.temperature < 0.0) {
    throw Error(ErrorCode::InvalidParameters, "temperature must be >= 0");
  }
  bool has_user = false;
  for (const Message& m : request.messages) {
    if (m.role != "system" && m.role != "user" && m.role != "assistant") {
      throw Error(ErrorCode::InvalidParameters, "unknown message role '" + m.role + "'");
    }
    has_user |= m.role == "user";
  }
  if (!has_user) {
    throw Error(ErrorCode::InvalidParameters, "request needs at least one user message");
  }
}

json request_to_json(const PromptRequest& request) {
  json messages = json::array();
  for (const Message& m : request.messages) {
    messages.push_back(json{{"role", m.role}, {"content", m.content}});
  }
  return json{{"model", request.model},
              {"temperature", request.temperature},
              {"messages", std::move(messages)}};
}

}  // namespace

std::unique_ptr<MockProvider> MockProvider::queue(std::vector<std::string> responses) {
  auto provider = std::unique_ptr<MockProvider>(new MockProvider(Mode::Queue));
  provider->queue_ = std::move(responses);
  return provider;
}

std::unique_ptr<MockProvider> MockProvider::patterns(
    std::vector<std::pair<std::string, std::string>> rules) {
  auto provider = std::unique_ptr<MockProvider>(new MockProvider(Mode::Patterns));
  provider->rules_ = std::move(rules);
  return provider;
}

std::unique_ptr<MockProvider> MockProvider::function(
    std::function<std::string(const PromptRequest&)> fn) {
  auto provider = std::unique_ptr<MockProvider>(new MockProvider(Mode::Function));
  provider->fn_ = std::move(fn);
  return provider;
}

std::unique_ptr<MockProvider> MockProvider::from_script_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "path not found: " + path.string());
  }
  json script = json::parse(in, nullptr, false);
  if (script.is_discarded() || !script.is_object() || !script.contains("mode")) {
    throw Error(ErrorCode::ConfigError, "mock script must be a JSON object with a 'mode'");
  }
  std::string mode = script["mode"].get<std::string>();
  if (mode == "queue") {
    if (!script.contains("responses") || !script["responses"].is_array()) {
      throw Error(ErrorCode::ConfigError, "queue script needs a 'responses' array");
    }
    std::vector<std::string> responses;
    for (const json& r : script["responses"]) responses.push_back(r.get<std::string>());
    if (responses.empty()) {
      throw Error(ErrorCode::ConfigError, "queue script must not be empty");
    }
    return queue(std::move(responses));
  }
  if (mode == "patterns") {
    if (!script.contains("rules") || !script["rules"].is_array()) {
      throw Error(ErrorCode::ConfigError, "patterns script needs a 'rules' array");
    }
    std::vector<std::pair<std::string, std::string>> rules;
    for (const json& r : script["rules"]) {
      rules.emplace_back(r.at("pattern").get<std::string>(),
                         r.at("response").get<std::string>());
    }
    return patterns(std::move(rules));
  }
  throw Error(ErrorCode::ConfigError, "unknown mock script mode '" + mode + "'");
}

CompletionResult MockProvider::complete(const PromptRequest& request) {
  calls_.fetch_add(1);
  CompletionResult result;
  result.provider_meta["provider"] = "mock";
  switch (mode_) {
    case Mode::Queue: {
      std::lock_guard<std::mutex> lock(mutex_);
      if (next_ >= queue_.size()) {
        throw Error(ErrorCode::ScriptExhausted,
                    "mock queue exhausted after " + std::to_string(queue_.size()) +
                        " responses (tag: " + request.request_tag + ")");
      }
      result.content = queue_[next_++];
      return result;
    }
    case Mode::Patterns: {
      const std::string* last_user = nullptr;
      for (const Message& m : request.messages) {
        if (m.role == "user") last_user = &m.content;
      }
      for (const auto& [pattern, response] : rules_) {
        bool tag_hit = request.request_tag.find(pattern) != std::string::npos;
        bool content_hit = last_user && last_user->find(pattern) != std::string::npos;
        if (pattern.empty() || tag_hit || content_hit) {
          result.content = response;
          return result;
        }
      }
      throw Error(ErrorCode::UnmatchedRequest,
                  "no mock rule matches request (tag: " + request.request_tag + ")");
    }
    case Mode::Function:
      result.content = fn_(request);
      return result;
  }
  throw Error(ErrorCode::UnmatchedRequest, "unreachable mock mode");
}

HttpProvider::HttpProvider(std::string endpoint, std::string credential_env, int timeout_ms)
    : endpoint_(std::move(endpoint)),
      credential_env_(std::move(credential_env)),
      timeout_ms_(timeout_ms) {}

CompletionResult HttpProvider::complete(const PromptRequest& request) {
  auto slash = endpoint_.find('/', endpoint_.find("://") == std::string::npos
                                       ? 0
                                       : endpoint_.find("://") + 3);
  std::string base = slash == std::string::npos ? endpoint_ : endpoint_.substr(0, slash);
  std::string path = slash == std::string::npos ? "/" : endpoint_.substr(slash);

  httplib::Client client(base);
  client.set_connection_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
  client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);

  httplib::Headers headers;
  if (const char* credential = std::getenv(credential_env_.c_str())) {
    headers.emplace("Authorization", std::string("Bearer ") + credential);
  }

  std::string body = request_to_json(request).dump();
  httplib::Result response = client.Post(path, headers, body, "application/json");
  if (!response) {
    throw Error(ErrorCode::Timeout, "no response from " + endpoint_ + " (" +
                                        httplib::to_string(response.error()) + ")");
  }
  if (response->status == 401 || response->status == 403) {
    throw Error(ErrorCode::AuthFailure,
                "provider rejected credentials (HTTP " + std::to_string(response->status) +
                    "); set $" + credential_env_);
  }
  if (response->status == 429) {
    throw Error(ErrorCode::RateLimited, "provider rate limit (HTTP 429)");
  }
  if (response->status >= 500) {
    throw Error(ErrorCode::Timeout,
                "provider transient failure (HTTP " + std::to_string(response->status) + ")");
  }
  if (response->status != 200) {
    throw Error(ErrorCode::MalformedProviderResponse,
                "unexpected HTTP " + std::to_string(response->status) + ": " + response->body);
  }

  json parsed = json::parse(response->body, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty()) {
    throw Error(ErrorCode::MalformedProviderResponse, "response lacks choices");
  }
  const json& first = parsed["choices"][0];
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    throw Error(ErrorCode::MalformedProviderResponse, "choice lacks message content");
  }
  CompletionResult result;
  result.content = first["message"]["content"].get<std::string>();
  if (result.content.empty()) {
    throw Error(ErrorCode::MalformedProviderResponse, "provider returned empty content");
  }
  result.provider_meta["provider"] = "http";
  if (parsed.contains("model") && parsed["model"].is_string()) {
    result.provider_meta["model"] = parsed["model"].get<std::string>();
  }
  return result;
}

Gateway::Gateway(std::unique_ptr<Provider> provider, GatewayConfig config)
    : provider_(std::move(provider)), config_(std::move(config)) {
  if (config_.concurrency < 1) config_.concurrency = 1;
  if (!config_.sleep_ms) {
    config_.sleep_ms = [](int ms) {
      std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    };
  }
  if (config_.cache_enabled && !config_.cache_dir.empty()) {
    std::filesystem::create_directories(config_.cache_dir);
  }
}

std::string Gateway::cache_key(const PromptRequest& request) {
  return sha256_hex(request_to_json(request).dump());
}

bool Gateway::load_cache(const std::string& key, CompletionResult* result) {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = memory_cache_.find(key);
    if (it != memory_cache_.end()) {
      result->content = it->second;
      result->provider_meta["provider"] = "cache";
      result->cached = true;
      return true;
    }
  }
  if (config_.cache_dir.empty()) return false;
  std::ifstream in(config_.cache_dir / (key + ".json"));
  if (!in) return false;
  json entry = json::parse(in, nullptr, false);
  if (entry.is_discarded() || !entry.contains("response")) return false;
  result->content = entry["response"]["content"].get<std::string>();
  result->provider_meta["provider"] = "cache";
  result->cached = true;
  std::lock_guard<std::mutex> lock(cache_mutex_);
  memory_cache_[key] = result->content;
  return true;
}

void Gateway::store_cache(const std::string& key, const PromptRequest& request,
                          const CompletionResult& result) {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  memory_cache_[key] = result.content;
  if (config_.cache_dir.empty()) return;
  json entry{{"key", key},
             {"request", request_to_json(request)},
             {"request_tag", request.request_tag},
             {"response", json{{"content", result.content}}}};
  std::ofstream out(config_.cache_dir / (key + ".json"));
  out << entry.dump(2) << "\n";
}

CompletionResult Gateway::call_with_retries(const PromptRequest& request) {
  int attempt = 0;
  for (;;) {
    try {
      provider_calls_.fetch_add(1);
      CompletionResult result = provider_->complete(request);
      if (result.content.empty()) {
        throw Error(ErrorCode::MalformedProviderResponse, "provider returned empty content");
      }
      return result;
    } catch (const Error& e) {
      bool transient = e.code() == ErrorCode::Timeout || e.code() == ErrorCode::RateLimited;
      if (!transient || attempt >= config_.max_retries) throw;
      config_.sleep_ms(config_.retry_base_ms * (1 << attempt));
      ++attempt;
    }
  }
}

CompletionResult Gateway::complete(const PromptRequest& request) {
  validate_request(request);
  const bool use_cache = config_.cache_enabled && !request.bypass_cache;
  const std::string key = cache_key(request);
  if (use_cache) {
    CompletionResult cached;
    if (load_cache(key, &cached)) {
      cache_hits_.fetch_add(1);
      return cached;
    }
  }

  {
    std::unique_lock<std::mutex> lock(limiter_mutex_);
    limiter_cv_.wait(lock, [&] { return in_flight_ < config_.concurrency; });
    ++in_flight_;
    int observed = in_flight_;
    int previous = max_in_flight_.load();
    while (observed > previous && !max_in_flight_.compare_exchange_weak(previous, observed)) {
    }
  }
  CompletionResult result;
  try {
    result = call_with_retries(request);
  } catch (...) {
    std::lock_guard<std::mutex> lock(limiter_mutex_);
    --in_flight_;
    limiter_cv_.notify_one();
    throw;
  }
  {
    std::lock_guard<std::mutex> lock(limiter_mutex_);
    --in_flight_;
    limiter_cv_.notify_one();
  }

  if (config_.cache_enabled) {
    store_cache(key, request, result);
  }
  result.cached = false;
  return result;
}

}  // namespace itemlab
