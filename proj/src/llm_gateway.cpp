#include "ebike/llm_gateway.hpp"

#include "ebike/errors.hpp"
#include "ebike/hash.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <thread>

namespace ebike::llm {

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool retryable(int status) {
    return status == 0 || status == 408 || status == 429 || status >= 500;
}

void default_sleep(std::chrono::milliseconds d) {
    if (d.count() > 0) std::this_thread::sleep_for(d);
}

}  // namespace

std::string make_request_key(const std::string& prompt, const std::string& model_name, double temperature) {
    char temp[32];
    std::snprintf(temp, sizeof temp, "%.17g", temperature);
    std::string material;
    material.reserve(prompt.size() + model_name.size() + 64);
    material += "model:" + std::to_string(model_name.size()) + ":" + model_name;
    material += "|temperature:" + std::string(temp);
    material += "|prompt:" + std::to_string(prompt.size()) + ":" + prompt;
    return sha256_hex(material);
}

std::string build_request_body(const CompletionRequest& request) {
    nlohmann::ordered_json body;
    body["model"] = request.model_name;
    body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    return body.dump();
}

std::string parse_response_body(const std::string& body) {
    try {
        const auto j = nlohmann::json::parse(body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw ProtocolError("message content is not a string");
        return content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("malformed completion response: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.empty()) return;
    if (std::filesystem::exists(path_)) {
        std::ifstream in(path_, std::ios::binary);
        if (!in) throw IoError("cannot read cache " + path_.string());
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                const auto j = nlohmann::json::parse(line);
                entries_.try_emplace(j.at("request_key").get<std::string>(), j.at("text").get<std::string>());
            } catch (const nlohmann::json::exception&) {
                // interrupted append; the request will simply be re-issued
            }
        }
    }
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw IoError("cannot open cache for append " + path_.string());
}

std::optional<std::string> ResponseCache::lookup(const std::string& request_key) {
    std::lock_guard lock(mu_);
    auto it = entries_.find(request_key);
    if (it == entries_.end()) {
        ++misses_;
        return std::nullopt;
    }
    ++hits_;
    return it->second;
}

void ResponseCache::store(const CompletionRequest& request, const std::string& request_key, const std::string& text) {
    std::lock_guard lock(mu_);
    if (!entries_.try_emplace(request_key, text).second) return;
    if (!out_.is_open()) return;
    nlohmann::ordered_json j;
    j["request_key"] = request_key;
    j["model"] = request.model_name;
    j["prompt_sha"] = sha256_hex(request.prompt);
    j["text"] = text;
    j["timestamp"] = utc_timestamp();
    out_ << j.dump() << '\n';
    out_.flush();
    if (!out_) throw IoError("cache append failed for " + path_.string());
}

CacheStats ResponseCache::stats() const {
    std::lock_guard lock(mu_);
    return {entries_.size(), hits_, misses_};
}

CacheStats cache_stats(const ResponseCache& cache) {
    return cache.stats();
}

// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(int requests_per_minute, Clock clock, Sleeper sleep)
    : rpm_(requests_per_minute),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })),
      sleep_(sleep ? std::move(sleep) : Sleeper(default_sleep)) {}

void RateLimiter::acquire() {
    if (rpm_ <= 0) return;
    constexpr auto kWindow = std::chrono::minutes(1);
    std::unique_lock lock(mu_);
    while (true) {
        const auto now = clock_();
        while (!window_.empty() && now - window_.front() >= kWindow) window_.pop_front();
        if (static_cast<int>(window_.size()) < rpm_) {
            window_.push_back(now);
            return;
        }
        const auto wait = std::chrono::ceil<std::chrono::milliseconds>(window_.front() + kWindow - now);
        // Holding the lock keeps waiters in arrival order.
        sleep_(wait);
    }
}

// ---------------------------------------------------------------------------

GatewayConfig GatewayConfig::from_env(const std::string& endpoint_override) {
    GatewayConfig c;
    if (const char* key = std::getenv(kApiKeyEnv)) c.api_key = key;
    if (!endpoint_override.empty()) {
        c.endpoint = endpoint_override;
    } else if (const char* ep = std::getenv(kEndpointEnv)) {
        c.endpoint = ep;
    }
    return c;
}

class Gateway::Slot {
public:
    explicit Slot(Gateway& g) : g_(g) {
        std::unique_lock lock(g_.mu_);
        g_.cv_.wait(lock, [&] { return g_.in_flight_ < g_.policy_.max_in_flight; });
        ++g_.in_flight_;
        g_.peak_in_flight_ = std::max(g_.peak_in_flight_, g_.in_flight_);
    }
    ~Slot() {
        {
            std::lock_guard lock(g_.mu_);
            --g_.in_flight_;
        }
        g_.cv_.notify_one();
    }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

private:
    Gateway& g_;
};

Gateway::Gateway(GatewayConfig config, std::shared_ptr<Transport> transport, ResponseCache& cache,
                 RetryPolicy policy, Sleeper sleep)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      cache_(cache),
      policy_(policy),
      sleep_(sleep ? std::move(sleep) : Sleeper(default_sleep)),
      limiter_(policy.requests_per_minute, {}, sleep_) {
    if (policy_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    if (policy_.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    if (!transport_) throw ConfigError("gateway requires a transport");
}

CompletionResult Gateway::complete(const CompletionRequest& request) {
    if (request.prompt.empty()) throw PreconditionError("completion prompt is empty");
    if (config_.api_key.empty()) {
        throw ConfigError(std::string("LLM credential missing: set ") + kApiKeyEnv);
    }
    if (config_.endpoint.empty()) {
        throw ConfigError(std::string("LLM endpoint missing: set ") + kEndpointEnv + " or pass --endpoint");
    }
    if (request.temperature < 0.0 || request.temperature > 1.0) {
        throw PreconditionError("temperature must lie in [0, 1]");
    }
    if (request.max_tokens < 1) throw PreconditionError("max_tokens must be positive");

    const std::string key = request.request_key();
    if (auto cached = cache_.lookup(key)) return {*cached, true, 0, 0};

    const auto start = std::chrono::steady_clock::now();
    const std::string body = build_request_body(request);
    const Headers headers = {{"Authorization", "Bearer " + config_.api_key}, {"Content-Type", "application/json"}};

    int last_status = 0;
    auto backoff = policy_.initial_backoff;
    for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
        limiter_.acquire();
        HttpResponse resp;
        {
            Slot slot(*this);
            try {
                resp = transport_->post(config_.endpoint, body, headers);
            } catch (const std::exception&) {
                resp = HttpResponse{0, {}};
            }
        }
        last_status = resp.status;
        if (resp.status >= 200 && resp.status < 300) {
            std::string text = parse_response_body(resp.body);
            cache_.store(request, key, text);
            const auto elapsed =
                std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
            return {std::move(text), false, elapsed.count(), attempt};
        }
        if (!retryable(resp.status) || attempt == policy_.max_attempts) break;
        sleep_(backoff);
        backoff = std::min(policy_.max_backoff, std::chrono::duration_cast<std::chrono::milliseconds>(
                                                    backoff * policy_.backoff_multiplier));
    }
    throw TransportError("completion failed, last HTTP status " + std::to_string(last_status), last_status);
}

int Gateway::peak_in_flight() const {
    std::lock_guard lock(mu_);
    return peak_in_flight_;
}

}  // namespace ebike::llm
