#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace vaf {

/// Caps the number of concurrent requests sharing one instance.
class RequestLimiter {
public:
    explicit RequestLimiter(int max_in_flight);

    void acquire();
    void release();
    [[nodiscard]] int max_in_flight() const noexcept { return max_; }
    [[nodiscard]] int peak_in_flight() const;

    class Slot {
    public:
        explicit Slot(RequestLimiter& l) : l_(l) { l_.acquire(); }
        ~Slot() { l_.release(); }
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;

    private:
        RequestLimiter& l_;
    };

private:
    int max_;
    int in_flight_ = 0;
    int peak_ = 0;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
};

struct ChatImage {
    std::vector<std::uint8_t> png;
};

struct ChatMessage {
    std::string role;
    std::vector<std::variant<std::string, ChatImage>> content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 1.0;
    double top_p = 0.8;
    std::optional<std::int64_t> seed;
};

struct ChatEndpoint {
    std::string url;  // http(s)://host[:port]/path
    std::string token;
    std::chrono::milliseconds timeout{120000};
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{500};
};

/// Chat-completion client. Transport failures and 5xx responses are retried
/// with exponential backoff; 401/403 fail at once.
class ChatClient {
public:
    ChatClient(ChatEndpoint endpoint, std::shared_ptr<RequestLimiter> limiter);

    /// Returns the first choice's message text. Throws Error(EndpointUnreachable),
    /// Error(AuthFailure) or Error(ResponseTimeout).
    std::string complete(const ChatRequest& request) const;

    [[nodiscard]] const ChatEndpoint& endpoint() const noexcept { return endpoint_; }

private:
    ChatEndpoint endpoint_;
    std::shared_ptr<RequestLimiter> limiter_;
};

std::string chat_request_json(const ChatRequest& request);
/// Extracts choices[0].message.content (string or list of text parts).
std::string chat_response_text(const std::string& body);

/// Outbound HTTP attempts made by this process (every retry counts).
std::uint64_t network_attempts() noexcept;
void count_network_attempt() noexcept;

struct ParsedUrl {
    std::string scheme_host_port;
    std::string path;
};
/// Throws std::invalid_argument.
ParsedUrl parse_url(const std::string& url);

}  // namespace vaf
