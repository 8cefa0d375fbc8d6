#include <atomic>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "vaf/chat.hpp"
#include "vaf/error.hpp"
#include "vaf/raster.hpp"

namespace vaf {

namespace {
std::atomic<std::uint64_t> g_attempts{0};
}

std::uint64_t network_attempts() noexcept { return g_attempts.load(); }
void count_network_attempt() noexcept { g_attempts.fetch_add(1); }

RequestLimiter::RequestLimiter(int max_in_flight) : max_(std::max(1, max_in_flight)) {}

void RequestLimiter::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return in_flight_ < max_; });
    ++in_flight_;
    peak_ = std::max(peak_, in_flight_);
}

void RequestLimiter::release() {
    {
        std::lock_guard lock(mutex_);
        --in_flight_;
    }
    cv_.notify_one();
}

int RequestLimiter::peak_in_flight() const {
    std::lock_guard lock(mutex_);
    return peak_;
}

ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("URL without scheme: " + url);
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw std::invalid_argument("unsupported URL scheme: " + scheme);
    const auto path_at = url.find('/', scheme_end + 3);
    ParsedUrl out;
    out.scheme_host_port = url.substr(0, path_at);
    out.path = path_at == std::string::npos ? "/" : url.substr(path_at);
    if (out.scheme_host_port.size() <= scheme_end + 3) throw std::invalid_argument("URL without host: " + url);
    return out;
}

std::string chat_request_json(const ChatRequest& request) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : request.messages) {
        nlohmann::json content = nlohmann::json::array();
        for (const auto& part : m.content) {
            if (const auto* text = std::get_if<std::string>(&part)) {
                content.push_back({{"type", "text"}, {"text", *text}});
            } else {
                const auto& img = std::get<ChatImage>(part);
                content.push_back({{"type", "image_url"},
                                   {"image_url", {{"url", "data:image/png;base64," + base64_encode(img.png)}}}});
            }
        }
        messages.push_back({{"role", m.role}, {"content", std::move(content)}});
    }
    nlohmann::json body{{"model", request.model},
                        {"messages", std::move(messages)},
                        {"temperature", request.temperature},
                        {"top_p", request.top_p}};
    if (request.seed) body["seed"] = *request.seed;
    return body.dump();
}

std::string chat_response_text(const std::string& body) {
    const auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    std::string out;
    for (const auto& part : content) {
        if (part.is_object() && part.value("type", "") == "text") out += part.value("text", "");
    }
    return out;
}

ChatClient::ChatClient(ChatEndpoint endpoint, std::shared_ptr<RequestLimiter> limiter)
    : endpoint_(std::move(endpoint)), limiter_(limiter ? std::move(limiter) : std::make_shared<RequestLimiter>(4)) {}

std::string ChatClient::complete(const ChatRequest& request) const {
    ParsedUrl url;
    try {
        url = parse_url(endpoint_.url);
    } catch (const std::invalid_argument& e) {
        throw Error(Errc::EndpointUnreachable, e.what());
    }
    const std::string body = chat_request_json(request);
    const auto timeout = endpoint_.timeout;

    enum class Failure { none, unreachable, timeout };
    Failure last = Failure::none;
    std::string last_detail;
    const int attempts = std::max(1, endpoint_.max_attempts);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(endpoint_.backoff_base * (1 << (attempt - 1)));

        RequestLimiter::Slot slot(*limiter_);
        httplib::Client cli(url.scheme_host_port);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
        cli.set_connection_timeout(secs.count(), usecs.count());
        cli.set_read_timeout(secs.count(), usecs.count());
        cli.set_write_timeout(secs.count(), usecs.count());
        if (!endpoint_.token.empty()) cli.set_bearer_token_auth(endpoint_.token);

        count_network_attempt();
        const auto started = std::chrono::steady_clock::now();
        auto res = cli.Post(url.path, body, "application/json");
        const auto elapsed = std::chrono::steady_clock::now() - started;
        if (!res) {
            // httplib also reports a refused connect as ConnectionTimeout, so go by the clock
            const bool timed_out =
                (res.error() == httplib::Error::ConnectionTimeout || res.error() == httplib::Error::Read) &&
                elapsed >= timeout * 9 / 10;
            last = timed_out ? Failure::timeout : Failure::unreachable;
            last_detail = fmt::format("{}: {}", endpoint_.url, httplib::to_string(res.error()));
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            throw Error(Errc::AuthFailure, fmt::format("{}: HTTP {}", endpoint_.url, res->status));
        }
        if (res->status >= 500) {
            last = Failure::unreachable;
            last_detail = fmt::format("{}: HTTP {}", endpoint_.url, res->status);
            continue;
        }
        if (res->status != 200) {
            throw Error(Errc::EndpointUnreachable, fmt::format("{}: HTTP {}", endpoint_.url, res->status));
        }
        try {
            return chat_response_text(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::EndpointUnreachable, fmt::format("{}: malformed response: {}", endpoint_.url, e.what()));
        }
    }
    if (last == Failure::timeout) {
        throw Error(Errc::ResponseTimeout, fmt::format("{} after {} attempts", last_detail, attempts));
    }
    throw Error(Errc::EndpointUnreachable, fmt::format("{} after {} attempts", last_detail, attempts));
}

}  // namespace vaf
