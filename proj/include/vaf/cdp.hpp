#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vaf/render.hpp"

namespace vaf {

/// Minimal DevTools-protocol client over one page websocket.
class CdpConnection {
public:
    /// Throws Error(BackendUnavailable) when the socket cannot be opened.
    CdpConnection(const std::string& host, int port, const std::string& path, std::chrono::milliseconds timeout);
    ~CdpConnection();
    CdpConnection(const CdpConnection&) = delete;
    CdpConnection& operator=(const CdpConnection&) = delete;

    /// Sends a command and waits for its reply, buffering events seen meanwhile.
    /// Throws Error(RendererFailure) on protocol errors or timeouts.
    nlohmann::json call(const std::string& method, nlohmann::json params = nlohmann::json::object());
    /// Waits for an event; returns false on timeout.
    bool wait_event(const std::string& method, std::chrono::milliseconds timeout);
    void close() noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct LiveOptions {
    std::string host = "127.0.0.1";
    int port = 9222;
    std::chrono::milliseconds page_load_timeout{30000};
    std::chrono::milliseconds command_timeout{30000};
    std::filesystem::path work_dir;  // rendered pages are written here; defaults to a temp dir
};

/// JavaScript returning boxes, page height and item appearance for the
/// given selectors as a JSON-serialisable object.
std::string layout_query_script(const std::vector<std::string>& selectors, const std::vector<std::string>& items);

/// Converts the layout query result into a LayoutIndex.
LayoutIndex layout_from_query(const nlohmann::json& result, const std::vector<std::string>& items);

/// Page HTML as written for the browser: a <base> pointing at the snapshot
/// root plus a stylesheet that freezes animations and transitions.
std::string live_page_html(const PageSource& page);

/// Renders through a Chromium-family browser reached over its
/// remote-debugging port. One browser tab per session.
class LiveBackend final : public RenderBackend {
public:
    explicit LiveBackend(LiveOptions options);
    ~LiveBackend() override;

    std::unique_ptr<RenderSession> open_session(const PageSource& page) override;
    [[nodiscard]] std::string_view name() const noexcept override { return "live"; }

private:
    std::filesystem::path page_file(const PageSource& page);

    LiveOptions options_;
    bool owns_work_dir_ = false;
    std::mutex mutex_;
    std::vector<std::pair<std::shared_ptr<const html::Document>, std::filesystem::path>> files_;
};

}  // namespace vaf
