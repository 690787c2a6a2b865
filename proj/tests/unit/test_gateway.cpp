#include <doctest.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <thread>
#include <vector>

#include "itemlab/error.hpp"
#include "itemlab/gateway.hpp"
#include "itemlab/hash.hpp"
#include "../support/test_support.hpp"

using namespace itemlab;

namespace {

PromptRequest simple_request(const std::string& content, const std::string& tag = "t") {
  PromptRequest request;
  request.model = "test-model";
  request.temperature = 1.0;
  request.messages = {{"user", content}};
  request.request_tag = tag;
  return request;
}

GatewayConfig no_cache_config() {
  GatewayConfig config;
  config.cache_enabled = false;
  config.sleep_ms = [](int) {};
  return config;
}

}  // namespace

TEST_CASE("sha256 known answer") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("mock queue serves responses in order and exhausts") {
  auto mock = MockProvider::queue({"one", "two", "three"});
  CHECK(mock->complete(simple_request("x")).content == "one");
  CHECK(mock->complete(simple_request("x")).content == "two");
  CHECK(mock->complete(simple_request("x")).content == "three");
  try {
    mock->complete(simple_request("x"));
    FAIL("expected ScriptExhausted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ScriptExhausted);
  }
}

TEST_CASE("mock patterns route by tag and by content") {
  auto mock = MockProvider::patterns({{"step1", "profiles"},
                                      {"step3", "Output (a)"},
                                      {"magic words", "content hit"}});
  CHECK(mock->complete(simple_request("x", "qg-sms/step1/m1")).content == "profiles");
  CHECK(mock->complete(simple_request("x", "qg-sms/step3/p/original")).content ==
        "Output (a)");
  CHECK(mock->complete(simple_request("say the magic words", "other")).content ==
        "content hit");
  try {
    mock->complete(simple_request("nothing", "nothing"));
    FAIL("expected UnmatchedRequest");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnmatchedRequest);
  }
}

TEST_CASE("gateway caching") {
  auto dir = testsupport::make_temp_dir("cache");

  SUBCASE("second identical request is served from cache with zero provider hits") {
    GatewayConfig config;
    config.cache_dir = dir / "c1";
    config.sleep_ms = [](int) {};
    Gateway gateway(MockProvider::queue({"answer"}), config);
    auto first = gateway.complete(simple_request("hello"));
    CHECK(first.content == "answer");
    CHECK_FALSE(first.cached);
    auto second = gateway.complete(simple_request("hello"));
    CHECK(second.content == "answer");
    CHECK(second.cached);
    CHECK(gateway.provider_calls() == 1);
    CHECK(gateway.cache_hits() == 1);
  }

  SUBCASE("cache persists across gateway instances") {
    GatewayConfig config;
    config.cache_dir = dir / "c2";
    config.sleep_ms = [](int) {};
    {
      Gateway gateway(MockProvider::queue({"answer"}), config);
      gateway.complete(simple_request("hello"));
    }
    Gateway fresh(MockProvider::queue({"never served"}), config);
    auto result = fresh.complete(simple_request("hello"));
    CHECK(result.content == "answer");
    CHECK(result.cached);
    CHECK(fresh.provider_calls() == 0);
  }

  SUBCASE("bypass_cache forces a provider call") {
    GatewayConfig config;
    config.cache_dir = dir / "c3";
    config.sleep_ms = [](int) {};
    Gateway gateway(MockProvider::queue({"first", "second"}), config);
    gateway.complete(simple_request("hello"));
    PromptRequest bypass = simple_request("hello");
    bypass.bypass_cache = true;
    CHECK(gateway.complete(bypass).content == "second");
    CHECK(gateway.provider_calls() == 2);
  }
}

TEST_CASE("cache keys hash (model, temperature, messages) only") {
  PromptRequest a = simple_request("same", "tag-one");
  PromptRequest b = simple_request("same", "tag-two");
  CHECK(Gateway::cache_key(a) == Gateway::cache_key(b));

  PromptRequest c = simple_request("same.");
  CHECK(Gateway::cache_key(a) != Gateway::cache_key(c));

  PromptRequest d = simple_request("same");
  d.temperature = 0.5;
  CHECK(Gateway::cache_key(a) != Gateway::cache_key(d));

  PromptRequest e = simple_request("same");
  e.model = "other-model";
  CHECK(Gateway::cache_key(a) != Gateway::cache_key(e));
}

TEST_CASE("retries with exponential backoff") {
  SUBCASE("429 beyond the retry budget surfaces RateLimited") {
    int calls = 0;
    auto provider = MockProvider::function([&](const PromptRequest&) -> std::string {
      ++calls;
      throw Error(ErrorCode::RateLimited, "HTTP 429");
    });
    std::vector<int> sleeps;
    GatewayConfig config = no_cache_config();
    config.max_retries = 2;
    config.retry_base_ms = 100;
    config.sleep_ms = [&](int ms) { sleeps.push_back(ms); };
    Gateway gateway(std::move(provider), config);
    try {
      gateway.complete(simple_request("x"));
      FAIL("expected RateLimited");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RateLimited);
    }
    CHECK(calls == 3);  // initial + 2 retries
    CHECK(sleeps == std::vector<int>{100, 200});
  }

  SUBCASE("transient failures then success") {
    int calls = 0;
    auto provider = MockProvider::function([&](const PromptRequest&) -> std::string {
      if (++calls < 3) throw Error(ErrorCode::Timeout, "flaky");
      return "recovered";
    });
    GatewayConfig config = no_cache_config();
    config.max_retries = 2;
    Gateway gateway(std::move(provider), config);
    CHECK(gateway.complete(simple_request("x")).content == "recovered");
    CHECK(calls == 3);
  }

  SUBCASE("auth failures are not retried") {
    int calls = 0;
    auto provider = MockProvider::function([&](const PromptRequest&) -> std::string {
      ++calls;
      throw Error(ErrorCode::AuthFailure, "bad key");
    });
    Gateway gateway(std::move(provider), no_cache_config());
    CHECK_THROWS_AS(gateway.complete(simple_request("x")), Error);
    CHECK(calls == 1);
  }
}

TEST_CASE("request validation") {
  Gateway gateway(MockProvider::queue({"unused"}), no_cache_config());

  PromptRequest no_user;
  no_user.model = "m";
  no_user.messages = {{"system", "setup"}};
  CHECK_THROWS_AS(gateway.complete(no_user), Error);

  PromptRequest negative_temperature = simple_request("x");
  negative_temperature.temperature = -0.5;
  CHECK_THROWS_AS(gateway.complete(negative_temperature), Error);
}

TEST_CASE("in-flight concurrency never exceeds the configured limit") {
  std::atomic<int> concurrent{0};
  std::atomic<int> peak{0};
  auto provider = MockProvider::function([&](const PromptRequest& request) {
    int now = ++concurrent;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --concurrent;
    return "r:" + request.request_tag;
  });
  GatewayConfig config = no_cache_config();
  config.concurrency = 2;
  Gateway gateway(std::move(provider), config);

  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&gateway, i] {
      gateway.complete(simple_request("req " + std::to_string(i), std::to_string(i)));
    });
  }
  for (auto& t : threads) t.join();
  CHECK(peak.load() <= 2);
  CHECK(gateway.max_in_flight_observed() <= 2);
  CHECK(gateway.provider_calls() == 8);
}

TEST_CASE("script files load queue and pattern modes") {
  auto dir = testsupport::make_temp_dir("script");
  {
    std::ofstream out(dir / "queue.json");
    out << R"({"mode":"queue","responses":["a","b"]})";
  }
  auto queue_mock = MockProvider::from_script_file(dir / "queue.json");
  CHECK(queue_mock->complete(simple_request("x")).content == "a");

  {
    std::ofstream out(dir / "patterns.json");
    out << R"({"mode":"patterns","rules":[{"pattern":"p1","response":"r1"}]})";
  }
  auto pattern_mock = MockProvider::from_script_file(dir / "patterns.json");
  CHECK(pattern_mock->complete(simple_request("x", "has p1 inside")).content == "r1");

  {
    std::ofstream out(dir / "bad.json");
    out << R"({"mode":"queue","responses":[]})";
  }
  CHECK_THROWS_AS(MockProvider::from_script_file(dir / "bad.json"), Error);
}
