#pragma once

// In-process stand-in for a browser's remote-debugging endpoint. Pages are
// "rendered" by the synthetic backend so the live client can be checked
// against known pixels and boxes.

#include <atomic>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "vaf/render.hpp"

namespace vaf::test {

class FakeDevtools {
public:
    explicit FakeDevtools(PageSource page, bool fire_load = true)
        : page_(std::move(page)), fire_load_(fire_load), acceptor_(ioc_, {boost::asio::ip::make_address("127.0.0.1"), 0}) {
        SyntheticBackend synthetic;
        session_ = synthetic.open_session(page_);
        layout_ = session_->layout_index();
        port_ = acceptor_.local_endpoint().port();
        thread_ = std::thread([this] { serve(); });
    }

    ~FakeDevtools() {
        stop_ = true;
        boost::system::error_code ignored;
        boost::asio::ip::tcp::socket poke(ioc_);
        poke.connect(acceptor_.local_endpoint(), ignored);
        thread_.join();
        for (auto& t : workers_) t.join();
    }

    [[nodiscard]] int port() const noexcept { return port_; }
    [[nodiscard]] const LayoutIndex& layout() const noexcept { return layout_; }
    std::atomic<int> closed_tabs{0};
    std::string navigated_html;  // contents of the file the client asked to load

private:
    using tcp = boost::asio::ip::tcp;
    using json = nlohmann::json;

    void serve() {
        while (!stop_) {
            tcp::socket socket(ioc_);
            boost::system::error_code ec;
            acceptor_.accept(socket, ec);
            if (ec || stop_) break;
            workers_.emplace_back([this, s = std::move(socket)]() mutable { handle(std::move(s)); });
        }
    }

    void handle(tcp::socket socket) {
        namespace http = boost::beast::http;
        namespace ws = boost::beast::websocket;
        try {
            boost::beast::flat_buffer buffer;
            http::request<http::string_body> req;
            http::read(socket, buffer, req);
            if (ws::is_upgrade(req)) {
                ws::stream<tcp::socket> stream(std::move(socket));
                stream.accept(req);
                talk(stream);
                return;
            }
            const std::string target(req.target());
            http::response<http::string_body> res{http::status::ok, req.version()};
            if (target == "/json/version") {
                res.body() = R"({"Browser":"Fake/1.0","Protocol-Version":"1.3"})";
            } else if (target.rfind("/json/new", 0) == 0) {
                res.body() = json{{"id", "T1"},
                                  {"webSocketDebuggerUrl", fmt::format("ws://127.0.0.1:{}/devtools/page/T1", port_)}}
                                 .dump();
            } else if (target.rfind("/json/close/", 0) == 0) {
                ++closed_tabs;
                res.body() = "Target is closing";
            } else {
                res.result(http::status::not_found);
            }
            res.prepare_payload();
            http::write(socket, res);
        } catch (const std::exception&) {
        }
    }

    template <class Stream>
    void talk(Stream& stream) {
        while (true) {
            boost::beast::flat_buffer buffer;
            boost::system::error_code ec;
            stream.read(buffer, ec);
            if (ec) return;
            const json msg = json::parse(boost::beast::buffers_to_string(buffer.data()));
            const std::string method = msg["method"];
            json result = json::object();
            std::vector<json> after;
            if (method == "Page.navigate") {
                const std::string url = msg["params"]["url"];
                std::ifstream in(url.substr(std::string("file://").size()));
                std::stringstream ss;
                ss << in.rdbuf();
                navigated_html = ss.str();
                result = {{"frameId", "F1"}};
                if (fire_load_) after.push_back({{"method", "Page.loadEventFired"}, {"params", {{"timestamp", 1.0}}}});
            } else if (method == "Runtime.evaluate") {
                result = {{"result", {{"type", "object"}, {"value", evaluate(msg["params"]["expression"])}}}};
            } else if (method == "Page.captureScreenshot") {
                const auto png = session_->render_view(scroll_).image.png();
                result = {{"data", base64_encode(png)}};
            }
            // an unrelated event first, to exercise buffering
            write(stream, json{{"method", "Network.dataReceived"}, {"params", json::object()}});
            write(stream, json{{"id", msg["id"]}, {"result", result}});
            for (const auto& e : after) write(stream, e);
        }
    }

    template <class Stream>
    static void write(Stream& stream, const json& j) {
        const std::string text = j.dump();
        stream.write(boost::asio::buffer(text));
    }

    static std::string rgb(Rgba c) { return fmt::format("rgb({}, {}, {})", c.r, c.g, c.b); }

    json evaluate(const std::string& expression) {
        static const std::regex scroll_re(R"(scrollTo\(0, (-?\d+)\))");
        std::smatch m;
        if (std::regex_search(expression, m, scroll_re)) {
            scroll_ = clamp_scroll(std::stoi(m[1]), layout_.page_height_px);
            return scroll_;
        }
        json out{{"boxes", json::object()},
                 {"appearance", json::object()},
                 {"page_height", layout_.page_height_px},
                 {"page_background", "rgb(255, 255, 255)"}};
        for (const auto& [sel, b] : layout_.boxes) {
            out["boxes"][sel] = {{"x", b.x}, {"y", b.y}, {"w", b.width}, {"h", b.height}};
        }
        for (const auto& [sel, a] : layout_.appearance) {
            std::string filter = a.card_blur_px > 0 ? fmt::format("blur({}px)", a.card_blur_px) : "none";
            if (a.sharpened) filter = "url(\"data:image/svg+xml,...#vaf-sharpen\")";
            out["appearance"][sel] = {
                {"background", rgb(a.background)},
                {"color", rgb(a.text_color)},
                {"font_size", a.font_size_px},
                {"font_family", a.font_family},
                {"filter", filter},
                {"image_filter", a.image_blur_px > 0 ? fmt::format("blur({}px)", a.image_blur_px) : "none"},
                {"transform", a.scale != 1.0 ? fmt::format("matrix({}, 0, 0, {}, 0, 0)", a.scale, a.scale) : "none"},
                {"has_image", a.has_image},
                {"label", a.label}};
        }
        return out;
    }

    PageSource page_;
    bool fire_load_;
    boost::asio::io_context ioc_;
    tcp::acceptor acceptor_;
    int port_ = 0;
    std::unique_ptr<RenderSession> session_;
    LayoutIndex layout_;
    int scroll_ = 0;
    std::atomic<bool> stop_{false};
    std::thread thread_;
    std::vector<std::thread> workers_;
};

}  // namespace vaf::test
