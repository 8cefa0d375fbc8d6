#include <atomic>
#include <fstream>
#include <optional>
#include <unistd.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>
#include <httplib.h>

#include "vaf/cdp.hpp"
#include "vaf/error.hpp"

namespace vaf {

namespace beast = boost::beast;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

// --- websocket connection -----------------------------------------------------

struct CdpConnection::Impl {
    net::io_context ioc;
    beast::websocket::stream<beast::tcp_stream> ws{ioc};
    std::chrono::milliseconds timeout;
    int next_id = 1;
    std::deque<json> events;
    bool open = false;

    // Runs one async operation to completion or until the deadline.
    template <class Start>
    beast::error_code run(Start&& start, std::chrono::milliseconds limit) {
        std::optional<beast::error_code> result;
        start([&](beast::error_code ec, auto&&...) { result = ec; });
        ioc.restart();
        ioc.run_for(limit);
        if (!result) {
            beast::get_lowest_layer(ws).cancel();
            ioc.restart();
            ioc.run();
            return beast::error::timeout;
        }
        return *result;
    }

    std::optional<json> read_message(std::chrono::milliseconds limit) {
        beast::flat_buffer buffer;
        auto ec = run([&](auto handler) { ws.async_read(buffer, handler); }, limit);
        if (ec == beast::error::timeout) return std::nullopt;
        if (ec) throw Error(Errc::RendererFailure, fmt::format("devtools read: {}", ec.message()));
        return json::parse(beast::buffers_to_string(buffer.data()), nullptr, false);
    }
};

CdpConnection::CdpConnection(const std::string& host, int port, const std::string& path,
                             std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>()) {
    impl_->timeout = timeout;
    try {
        tcp::resolver resolver(impl_->ioc);
        const auto endpoints = resolver.resolve(host, std::to_string(port));
        auto ec = impl_->run(
            [&](auto handler) { beast::get_lowest_layer(impl_->ws).async_connect(endpoints, handler); }, timeout);
        if (ec) throw Error(Errc::BackendUnavailable, fmt::format("{}:{}: {}", host, port, ec.message()));
        impl_->ws.read_message_max(64 * 1024 * 1024);
        ec = impl_->run([&](auto handler) { impl_->ws.async_handshake(fmt::format("{}:{}", host, port), path, handler); },
                        timeout);
        if (ec) throw Error(Errc::BackendUnavailable, fmt::format("websocket handshake {}: {}", path, ec.message()));
        impl_->open = true;
    } catch (const boost::system::system_error& e) {
        throw Error(Errc::BackendUnavailable, e.what());
    }
}

CdpConnection::~CdpConnection() { close(); }

json CdpConnection::call(const std::string& method, json params) {
    if (!impl_->open) throw Error(Errc::SessionClosed, method);
    const int id = impl_->next_id++;
    const std::string text = json{{"id", id}, {"method", method}, {"params", std::move(params)}}.dump();
    auto ec = impl_->run([&](auto handler) { impl_->ws.async_write(net::buffer(text), handler); }, impl_->timeout);
    if (ec) throw Error(Errc::RendererFailure, fmt::format("{}: {}", method, ec.message()));

    const auto deadline = std::chrono::steady_clock::now() + impl_->timeout;
    while (true) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) throw Error(Errc::RendererFailure, fmt::format("{}: no reply", method));
        auto msg = impl_->read_message(left);
        if (!msg) throw Error(Errc::RendererFailure, fmt::format("{}: no reply", method));
        if (msg->is_discarded()) continue;
        if (msg->contains("id") && (*msg)["id"] == id) {
            if (msg->contains("error")) {
                throw Error(Errc::RendererFailure, fmt::format("{}: {}", method, (*msg)["error"].dump()));
            }
            return msg->value("result", json::object());
        }
        if (msg->contains("method")) impl_->events.push_back(std::move(*msg));
    }
}

bool CdpConnection::wait_event(const std::string& method, std::chrono::milliseconds timeout) {
    for (auto it = impl_->events.begin(); it != impl_->events.end(); ++it) {
        if ((*it)["method"] == method) {
            impl_->events.erase(it);
            return true;
        }
    }
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) return false;
        auto msg = impl_->read_message(left);
        if (!msg) return false;
        if (msg->is_discarded() || !msg->contains("method")) continue;
        if ((*msg)["method"] == method) return true;
        impl_->events.push_back(std::move(*msg));
    }
}

void CdpConnection::close() noexcept {
    if (!impl_ || !impl_->open) return;
    impl_->open = false;
    beast::error_code ignored;
    impl_->run([&](auto handler) { impl_->ws.async_close(beast::websocket::close_code::normal, handler); },
               std::chrono::milliseconds(1000));
    beast::get_lowest_layer(impl_->ws).socket().close(ignored);
}

// --- page preparation ---------------------------------------------------------

namespace {

constexpr std::string_view kFreezeCss =
    "*,*::before,*::after{animation:none!important;transition:none!important;caret-color:transparent!important}"
    "::-webkit-scrollbar{display:none}html{scrollbar-width:none}";

}  // namespace

std::string live_page_html(const PageSource& page) {
    html::Document doc = *page.document;
    html::Node* head = nullptr;
    for (html::Node* n : doc.query_all("head")) {
        head = n;
        break;
    }
    if (head == nullptr) {
        html::Node* root = nullptr;
        for (html::Node* n : doc.query_all("html")) {
            root = n;
            break;
        }
        html::Node& parent = root != nullptr ? *root : doc.root();
        head = &parent.insert_child(0, html::Node::make_element("head"));
    }
    auto base = html::Node::make_element("base");
    const auto& asset_dir = page.snapshot->asset_root.empty() ? page.snapshot->root : page.snapshot->asset_root;
    std::string root_url = "file://" + std::filesystem::absolute(asset_dir).lexically_normal().string();
    if (root_url.back() != '/') root_url += '/';
    base->set_attribute("href", root_url);
    head->insert_child(0, std::move(base));
    auto style = html::Node::make_element("style");
    style->append_child(html::Node::make_text(std::string(kFreezeCss)));
    head->append_child(std::move(style));
    return html::serialize(doc);
}

std::string layout_query_script(const std::vector<std::string>& selectors, const std::vector<std::string>& items) {
    json sels = selectors;
    json its = items;
    return fmt::format(R"js((() => {{
  const sels = {};
  const items = {};
  const sx = window.scrollX, sy = window.scrollY;
  const out = {{boxes: {{}}, appearance: {{}},
    page_height: Math.max(document.documentElement.scrollHeight, document.body ? document.body.scrollHeight : 0),
    page_background: document.body ? getComputedStyle(document.body).backgroundColor : 'rgb(255, 255, 255)'}};
  for (const s of sels) {{
    const el = document.querySelector(s);
    if (!el) continue;
    const r = el.getBoundingClientRect();
    out.boxes[s] = {{x: r.left + sx, y: r.top + sy, w: r.width, h: r.height}};
  }}
  for (const s of items) {{
    const el = document.querySelector(s);
    if (!el) continue;
    const cs = getComputedStyle(el);
    const img = el.querySelector('img');
    const h = el.querySelector('h1,h2,h3,h4,h5,h6');
    out.appearance[s] = {{background: cs.backgroundColor, color: cs.color, font_size: parseFloat(cs.fontSize),
      font_family: cs.fontFamily, filter: cs.filter, image_filter: img ? getComputedStyle(img).filter : 'none',
      transform: cs.transform, has_image: !!img, label: (h || el).textContent.replace(/\s+/g, ' ').trim()}};
  }}
  return out;
}})())js",
                       sels.dump(), its.dump());
}

namespace {

double function_arg(const std::string& value, const std::string& fn) {
    const auto at = value.find(fn + "(");
    if (at == std::string::npos) return 0;
    return std::strtod(value.c_str() + at + fn.size() + 1, nullptr);
}

}  // namespace

LayoutIndex layout_from_query(const json& result, const std::vector<std::string>& items) {
    LayoutIndex layout;
    layout.page_height_px = std::max(kViewportHeight, static_cast<int>(std::ceil(result.value("page_height", 0.0))));
    const Rgba page_bg = composite(parse_color(result.value("page_background", "")).value_or(Rgba{255, 255, 255, 255}),
                                   Rgba{255, 255, 255, 255});
    const json boxes = result.value("boxes", json::object());
    for (const auto& [sel, b] : boxes.items()) {
        layout.boxes[sel] = BoundingBox{b.value("x", 0.0), b.value("y", 0.0), b.value("w", 0.0), b.value("h", 0.0)};
    }
    const json appearance = result.value("appearance", json::object());
    for (const auto& sel : items) {
        if (!appearance.contains(sel)) continue;
        const json& a = appearance[sel];
        ItemAppearance look;
        look.background = composite(parse_color(a.value("background", "")).value_or(Rgba{0, 0, 0, 0}), page_bg);
        look.text_color = parse_color(a.value("color", "")).value_or(Rgba{0, 0, 0, 255});
        look.font_size_px = a.value("font_size", 16.0);
        look.font_family = a.value("font_family", "");
        const std::string filter = a.value("filter", "none");
        look.card_blur_px = function_arg(filter, "blur");
        look.sharpened = filter.find("vaf-sharpen") != std::string::npos;
        look.image_blur_px = function_arg(a.value("image_filter", "none"), "blur");
        // computed transforms come back as matrix(a, b, c, d, e, f)
        const std::string transform = a.value("transform", "none");
        look.scale = transform.rfind("matrix(", 0) == 0 ? function_arg(transform, "matrix") : 1.0;
        look.has_image = a.value("has_image", false);
        look.label = a.value("label", "");
        layout.appearance[sel] = std::move(look);
    }
    return layout;
}

// --- backend ------------------------------------------------------------------

namespace {

class MemoryPixels final : public PixelSource {
public:
    explicit MemoryPixels(Raster r) : raster_(std::move(r)) {}
    const Raster& raster() const override { return raster_; }

private:
    Raster raster_;
};

Raster fit_viewport(const Raster& shot) {
    if (shot.width() == kViewportWidth && shot.height() == kViewportHeight) return shot;
    Raster out(kViewportWidth, kViewportHeight);
    for (int y = 0; y < std::min(shot.height(), kViewportHeight); ++y) {
        for (int x = 0; x < std::min(shot.width(), kViewportWidth); ++x) out.set(x, y, shot.at(x, y));
    }
    return out;
}

class LiveSession final : public RenderSession {
public:
    LiveSession(const LiveOptions& options, std::string target_id, std::unique_ptr<CdpConnection> cdp,
                std::vector<std::string> items, LayoutIndex layout)
        : options_(options),
          target_id_(std::move(target_id)),
          cdp_(std::move(cdp)),
          items_(std::move(items)),
          layout_(std::move(layout)) {}

    ~LiveSession() override { close(); }

    RenderedView render_view(int scroll_y) override {
        if (!cdp_) throw Error(Errc::SessionClosed, "live session");
        const int wanted = clamp_scroll(scroll_y, layout_.page_height_px);
        const json scrolled = cdp_->call(
            "Runtime.evaluate",
            {{"expression", fmt::format("window.scrollTo(0, {}); window.scrollY", wanted)}, {"returnByValue", true}});
        const int actual = static_cast<int>(std::lround(scrolled.value("result", json::object()).value("value", 0.0)));
        const json shot = cdp_->call("Page.captureScreenshot", {{"format", "png"}, {"fromSurface", true}});
        const auto png = base64_decode(shot.value("data", ""));
        Raster pixels;
        try {
            pixels = fit_viewport(decode_png(png));
        } catch (const std::exception& e) {
            throw Error(Errc::RendererFailure, fmt::format("screenshot: {}", e.what()));
        }
        RenderedView view;
        view.scroll_y = actual;
        view.page_height_px = layout_.page_height_px;
        view.image = ViewportImage(std::make_shared<MemoryPixels>(std::move(pixels)), 0);
        view.visible_items = visible_items_for(layout_, items_, actual);
        return view;
    }

    const LayoutIndex& layout_index() override {
        if (!cdp_) throw Error(Errc::SessionClosed, "live session");
        return layout_;
    }

    void close() override {
        if (!cdp_) return;
        cdp_->close();
        cdp_.reset();
        httplib::Client http(options_.host, options_.port);
        http.set_connection_timeout(1, 0);
        http.Get(fmt::format("/json/close/{}", target_id_));
    }

private:
    LiveOptions options_;
    std::string target_id_;
    std::unique_ptr<CdpConnection> cdp_;
    std::vector<std::string> items_;
    LayoutIndex layout_;
};

}  // namespace

LiveBackend::LiveBackend(LiveOptions options) : options_(std::move(options)) {
    if (options_.work_dir.empty()) {
        options_.work_dir = std::filesystem::temp_directory_path() / fmt::format("vaf-live-{}", ::getpid());
        owns_work_dir_ = true;
    }
}

LiveBackend::~LiveBackend() {
    if (owns_work_dir_) {
        std::error_code ignored;
        std::filesystem::remove_all(options_.work_dir, ignored);
    }
}

std::filesystem::path LiveBackend::page_file(const PageSource& page) {
    std::lock_guard lock(mutex_);
    for (const auto& [doc, path] : files_) {
        if (doc == page.document) return path;
    }
    const auto dir = options_.work_dir / fmt::format("{}-{}", page.snapshot->id, files_.size());
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::absolute(dir / "page.html");
    std::ofstream(path, std::ios::binary) << live_page_html(page);
    files_.emplace_back(page.document, path);
    return path;
}

std::unique_ptr<RenderSession> LiveBackend::open_session(const PageSource& page) {
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.command_timeout).count();
    httplib::Client http(options_.host, options_.port);
    http.set_connection_timeout(std::max<long>(1, secs), 0);
    http.set_read_timeout(std::max<long>(1, secs), 0);
    auto version = http.Get("/json/version");
    if (!version || version->status != 200) {
        throw Error(Errc::BackendUnavailable,
                    fmt::format("no devtools endpoint at {}:{} ({})", options_.host, options_.port,
                                version ? std::to_string(version->status) : httplib::to_string(version.error())));
    }
    auto created = http.Put("/json/new?about:blank");
    if (!created || created->status != 200) created = http.Get("/json/new?about:blank");
    if (!created || created->status != 200) throw Error(Errc::BackendUnavailable, "devtools refused to open a tab");
    const json target = json::parse(created->body, nullptr, false);
    if (target.is_discarded() || !target.contains("webSocketDebuggerUrl")) {
        throw Error(Errc::BackendUnavailable, "devtools tab without a websocket URL");
    }
    const std::string id = target.value("id", "");
    const std::string ws_url = target["webSocketDebuggerUrl"].get<std::string>();
    const auto path_at = ws_url.find('/', ws_url.find("://") + 3);
    if (path_at == std::string::npos) throw Error(Errc::BackendUnavailable, "bad websocket URL " + ws_url);

    auto cdp = std::make_unique<CdpConnection>(options_.host, options_.port, ws_url.substr(path_at),
                                               options_.command_timeout);
    cdp->call("Page.enable");
    cdp->call("Emulation.setDeviceMetricsOverride",
              {{"width", kViewportWidth}, {"height", kViewportHeight}, {"deviceScaleFactor", 1}, {"mobile", false}});
    cdp->call("Page.navigate", {{"url", "file://" + page_file(page).string()}});
    if (!cdp->wait_event("Page.loadEventFired", options_.page_load_timeout)) {
        cdp->close();
        throw Error(Errc::PageLoadTimeout,
                    fmt::format("{} did not load within {} ms", page.variant_id, options_.page_load_timeout.count()));
    }

    std::vector<std::string> selectors = page.manifest.item_selectors;
    for (const auto& [slot, sel] : page.manifest.anchor_slots) selectors.push_back(sel);
    const json result = cdp->call("Runtime.evaluate", {{"expression", layout_query_script(selectors, page.manifest.item_selectors)},
                                                       {"returnByValue", true}});
    const json value = result.value("result", json::object()).value("value", json::object());
    LayoutIndex layout = layout_from_query(value, page.manifest.item_selectors);
    if (!layout.contains(page.manifest.target_selector)) {
        throw Error(Errc::SelectorNotInPage, page.manifest.target_selector);
    }
    return std::make_unique<LiveSession>(options_, id, std::move(cdp), page.manifest.item_selectors, std::move(layout));
}

}  // namespace vaf
