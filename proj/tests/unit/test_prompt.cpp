#include <doctest.h>

#include <vector>

#include "fixtures.hpp"
#include "vaf/agent.hpp"
#include "vaf/error.hpp"
#include "vaf/render.hpp"

using namespace vaf;

namespace {

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto at = hay.find(needle); at != std::string::npos; at = hay.find(needle, at + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("first step carries one screenshot and the filled instruction") {
    const auto& shop = test::fixture("shop-grid");
    SyntheticBackend backend;
    auto session = backend.open_session(original_page(shop));
    const std::vector<RenderedView> views{session->render_view(0)};
    const auto fields = scenario_fields(shop.snapshot->prompt_fields);
    const auto p = build_prompt(fields, {}, views, 12);

    CHECK(p.step_index == 0);
    CHECK(p.images.size() == 1);
    CHECK(p.user_text.find("Find the BEST") != std::string::npos);
    CHECK(p.user_text.find('{') == std::string::npos);
    CHECK(count(p.user_text, "I can see the following " + p.item_plural + " on this screen:") == 2);
    CHECK(p.user_text.find("(640,600)") != std::string::npos);
    CHECK(p.user_text.find("top of the page") != std::string::npos);
    REQUIRE(p.messages.size() == 3);
    CHECK(p.messages[0].role == "system");
    CHECK(p.messages[2].parts[0].kind == PromptPart::Kind::image);
}

TEST_CASE("history interleaves screenshots and earlier turns in order") {
    const auto& shop = test::fixture("shop-grid");
    SyntheticBackend backend;
    auto session = backend.open_session(original_page(shop));
    const std::vector<RenderedView> views{session->render_view(0), session->render_view(600), session->render_view(1200),
                                          session->render_view(1800)};
    std::vector<AgentTurn> history;
    for (int i = 0; i < 3; ++i) {
        history.push_back(parse_turn(format_turn("step " + std::to_string(i),
                                                 action::Scroll{640, 600, ScrollDirection::down})));
    }
    const auto p = build_prompt(scenario_fields(shop.snapshot->prompt_fields), history, views, 12);
    CHECK(p.step_index == 3);
    REQUIRE(p.images.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(p.images[k].materialize() == views[k].image.materialize());
    }
    // system, instruction, then (image, assistant) x3 and the current image
    REQUIRE(p.messages.size() == 2 + 3 * 2 + 1);
    std::size_t expected_image = 0;
    std::size_t expected_turn = 0;
    for (std::size_t m = 2; m < p.messages.size(); ++m) {
        const auto& msg = p.messages[m];
        if (msg.role == "assistant") {
            CHECK(msg.parts[0].text == history[expected_turn++].raw);
        } else {
            CHECK(msg.parts[0].image_index == expected_image++);
        }
    }
    CHECK(expected_image == 4);
    // last view sits at the page bottom (2120 - 1200 = 920 is clamped)
    CHECK(p.user_text.find("bottom of the page") != std::string::npos);
}

TEST_CASE("template substitution") {
    CHECK(fill_template("a {X} b {not a field} {Y_2}", {{"X", "1"}, {"Y_2", "2"}}) == "a 1 b {not a field} 2");
    try {
        (void)fill_template("{TARGET_CATEGORY}", {});
        FAIL("filled");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TemplateFieldMissing);
        CHECK(e.detail().find("TARGET_CATEGORY") != std::string::npos);
    }
    const auto& shop = test::fixture("shop-grid");
    SyntheticBackend backend;
    auto session = backend.open_session(original_page(shop));
    const std::vector<RenderedView> views{session->render_view(0)};
    auto fields = scenario_fields(shop.snapshot->prompt_fields);
    fields.erase("VISIBLE_ITEM_SINGULAR");
    CHECK_THROWS_AS((void)build_prompt(fields, {}, views, 12), Error);
}
