#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace itemlab {

struct Message {
  std::string role;  // system | user | assistant
  std::string content;

  bool operator==(const Message&) const = default;
};

struct PromptRequest {
  std::string model;
  double temperature = 1.0;
  std::vector<Message> messages;
  std::string request_tag;   // strategy/step/pair id, for scripting and audit
  bool bypass_cache = false;
};

struct CompletionResult {
  std::string content;
  std::map<std::string, std::string> provider_meta;
  bool cached = false;
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string name() const = 0;
  virtual CompletionResult complete(const PromptRequest& request) = 0;
};

// Deterministic provider for offline runs and tests. Three scripting modes:
//   queue    — responses served FIFO; exhaustion is an error
//   patterns — ordered (pattern, response) rules; a rule matches when its
//              pattern is a substring of the request tag or of the last
//              user message; first match wins
//   function — arbitrary deterministic callable
class MockProvider : public Provider {
 public:
  static std::unique_ptr<MockProvider> queue(std::vector<std::string> responses);
  static std::unique_ptr<MockProvider> patterns(
      std::vector<std::pair<std::string, std::string>> rules);
  static std::unique_ptr<MockProvider> function(
      std::function<std::string(const PromptRequest&)> fn);
  // JSON script: {"mode":"queue","responses":[...]} or
  // {"mode":"patterns","rules":[{"pattern":"...","response":"..."}]}
  static std::unique_ptr<MockProvider> from_script_file(const std::filesystem::path& path);

  std::string name() const override { return "mock"; }
  CompletionResult complete(const PromptRequest& request) override;

  std::uint64_t calls() const { return calls_.load(); }

 private:
  enum class Mode { Queue, Patterns, Function };
  MockProvider(Mode mode) : mode_(mode) {}

  Mode mode_;
  std::mutex mutex_;
  std::vector<std::string> queue_;
  std::size_t next_ = 0;
  std::vector<std::pair<std::string, std::string>> rules_;
  std::function<std::string(const PromptRequest&)> fn_;
  std::atomic<std::uint64_t> calls_{0};
};

// Chat-completions HTTP provider: messages array in, first choice text out.
// The credential is read from the named environment variable at call time.
class HttpProvider : public Provider {
 public:
  HttpProvider(std::string endpoint, std::string credential_env, int timeout_ms = 30000);

  std::string name() const override { return "http"; }
  CompletionResult complete(const PromptRequest& request) override;

 private:
  std::string endpoint_;
  std::string credential_env_;
  int timeout_ms_;
};

struct GatewayConfig {
  int max_retries = 2;       // retries after the first attempt
  int concurrency = 4;       // max in-flight provider calls
  int retry_base_ms = 500;   // doubled per retry
  bool cache_enabled = true;
  std::filesystem::path cache_dir;  // empty: in-memory cache only
  // Injectable for tests; defaults to a real sleep.
  std::function<void(int)> sleep_ms;
};

class Gateway {
 public:
  Gateway(std::unique_ptr<Provider> provider, GatewayConfig config);

  CompletionResult complete(const PromptRequest& request);

  // Content hash of (model, temperature, messages); the request tag does
  // not participate.
  static std::string cache_key(const PromptRequest& request);

  std::uint64_t provider_calls() const { return provider_calls_.load(); }
  std::uint64_t cache_hits() const { return cache_hits_.load(); }
  int max_in_flight_observed() const { return max_in_flight_.load(); }
  Provider& provider() { return *provider_; }

 private:
  CompletionResult call_with_retries(const PromptRequest& request);
  void store_cache(const std::string& key, const PromptRequest& request,
                   const CompletionResult& result);
  bool load_cache(const std::string& key, CompletionResult* result);

  std::unique_ptr<Provider> provider_;
  GatewayConfig config_;

  std::mutex cache_mutex_;
  std::map<std::string, std::string> memory_cache_;

  std::mutex limiter_mutex_;
  std::condition_variable limiter_cv_;
  int in_flight_ = 0;
  std::atomic<int> max_in_flight_{0};
  std::atomic<std::uint64_t> provider_calls_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
};

}  // namespace itemlab
