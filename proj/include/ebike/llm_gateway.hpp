#pragma once

// Uniform text-completion interface to a chat-style LLM endpoint.
//
// Every completion is keyed by a hash of (prompt, model, temperature) and
// stored in an append-only JSONL cache before it is returned, so a run can be
// interrupted and resumed, and a warm cache replays a run exactly. Network
// access goes through the Transport interface; tests script it.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ebike::llm {

inline constexpr const char* kApiKeyEnv = "EBIKE_LLM_API_KEY";
inline constexpr const char* kEndpointEnv = "EBIKE_LLM_ENDPOINT";

std::string make_request_key(const std::string& prompt, const std::string& model_name, double temperature);

struct CompletionRequest {
    std::string prompt;
    std::string model_name;
    double temperature = 0.0;
    int max_tokens = 256;

    std::string request_key() const { return make_request_key(prompt, model_name, temperature); }
};

struct CompletionResult {
    std::string text;
    bool from_cache = false;
    std::int64_t latency_ms = 0;
    int attempts = 0;  // network attempts; 0 for cache hits
};

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

struct HttpResponse {
    int status = 0;  // 0: no response (connection failure)
    std::string body;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse post(const std::string& url, const std::string& body, const Headers& headers) = 0;
};

// cpp-httplib backed transport; supports http:// and https:// URLs.
class HttpTransport : public Transport {
public:
    explicit HttpTransport(std::chrono::seconds timeout = std::chrono::seconds(120));
    HttpResponse post(const std::string& url, const std::string& body, const Headers& headers) override;

private:
    std::chrono::seconds timeout_;
};

// Chat-completion wire format.
std::string build_request_body(const CompletionRequest& request);
// Text of the first choice's message. Throws ProtocolError.
std::string parse_response_body(const std::string& body);

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

struct CacheStats {
    std::size_t entries = 0;
    std::size_t hits = 0;
    std::size_t misses = 0;
    bool operator==(const CacheStats&) const = default;
};

class ResponseCache {
public:
    // Empty path: in-memory only. Otherwise existing entries are loaded and new
    // ones appended. A truncated trailing line (interrupted write) is ignored.
    explicit ResponseCache(std::filesystem::path path = {});

    ResponseCache(const ResponseCache&) = delete;
    ResponseCache& operator=(const ResponseCache&) = delete;

    // Counts a hit or a miss.
    std::optional<std::string> lookup(const std::string& request_key);
    // Idempotent: a key already present is left untouched.
    void store(const CompletionRequest& request, const std::string& request_key, const std::string& text);

    CacheStats stats() const;

private:
    std::filesystem::path path_;
    std::ofstream out_;
    mutable std::mutex mu_;
    std::unordered_map<std::string, std::string> entries_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

CacheStats cache_stats(const ResponseCache& cache);

// ---------------------------------------------------------------------------
// Rate limiting
// ---------------------------------------------------------------------------

using Clock = std::function<std::chrono::steady_clock::time_point()>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

// Sliding one-minute window; requests_per_minute <= 0 disables the ceiling.
class RateLimiter {
public:
    RateLimiter(int requests_per_minute, Clock clock = {}, Sleeper sleep = {});
    // Blocks until a request may start and records it.
    void acquire();

private:
    int rpm_;
    Clock clock_;
    Sleeper sleep_;
    std::mutex mu_;
    std::deque<std::chrono::steady_clock::time_point> window_;
};

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    double backoff_multiplier = 2.0;
    std::chrono::milliseconds max_backoff{30'000};
    int max_in_flight = 4;
    int requests_per_minute = 60;
};

struct GatewayConfig {
    std::string endpoint;
    std::string api_key;

    // Reads EBIKE_LLM_ENDPOINT / EBIKE_LLM_API_KEY; a non-empty override wins
    // for the endpoint.
    static GatewayConfig from_env(const std::string& endpoint_override = {});
};

class Gateway {
public:
    Gateway(GatewayConfig config, std::shared_ptr<Transport> transport, ResponseCache& cache,
            RetryPolicy policy = {}, Sleeper sleep = {});

    // Blocking; safe to call from several threads.
    CompletionResult complete(const CompletionRequest& request);

    int peak_in_flight() const;
    ResponseCache& cache() { return cache_; }

private:
    class Slot;

    GatewayConfig config_;
    std::shared_ptr<Transport> transport_;
    ResponseCache& cache_;
    RetryPolicy policy_;
    Sleeper sleep_;
    RateLimiter limiter_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    int in_flight_ = 0;
    int peak_in_flight_ = 0;
};

}  // namespace ebike::llm
