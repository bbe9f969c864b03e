#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "ebike/errors.hpp"
#include "ebike/llm_gateway.hpp"

namespace ebike::llm {

HttpTransport::HttpTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpResponse HttpTransport::post(const std::string& url, const std::string& body, const Headers& headers) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint URL must include a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    httplib::Headers h;
    std::string content_type = "application/json";
    for (const auto& [k, v] : headers) {
        if (k == "Content-Type") {
            content_type = v;
        } else {
            h.emplace(k, v);
        }
    }
    auto res = client.Post(path, h, body, content_type);
    if (!res) return {0, {}};
    return {res->status, res->body};
}

}  // namespace ebike::llm
