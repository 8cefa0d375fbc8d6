#include <doctest.h>

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "../common/reference_tables.hpp"
#include "fixtures.hpp"
#include "scratch.hpp"
#include "vaf/error.hpp"
#include "vaf/render.hpp"
#include "vaf/variant.hpp"

using namespace vaf;
namespace fs = std::filesystem;

namespace {

Errc load_error(const fs::path& root) {
    try {
        (void)load_snapshot(root);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("loaded without error");
    return Errc::InvalidConfig;
}

VariantSpec spec(const std::string& id) {
    for (auto& s : default_catalog()) {
        if (s.id == id) return s;
    }
    FAIL("no variant " << id);
    return {};
}

}  // namespace

TEST_CASE("fixtures load with their manifests") {
    const auto& shop = test::fixture("shop-grid");
    CHECK(shop.manifest.item_selectors.size() == 10);
    CHECK(shop.manifest.target_selector == shop.manifest.item_selectors[0]);
    CHECK(shop.snapshot->page_height_px >= kMinPageHeight);

    const auto& news = test::fixture("news-list");
    CHECK(news.snapshot->baseline_style.background == "#394f78");
    CHECK(news.snapshot->baseline_style.font_size_px == doctest::Approx(28.8));
    CHECK(news.snapshot->scenario == Scenario::news);

    // deterministic
    const auto again = load_snapshot(test::fixture_path("shop-grid"));
    CHECK(html::equal_trees(again.snapshot->document.root(), shop.snapshot->document.root()));
    CHECK(again.manifest.item_selectors == shop.manifest.item_selectors);
}

TEST_CASE("manifest problems are reported by kind") {
    test::Scratch dir;
    const auto root = dir.copy_fixture("shop-grid");
    auto edit = [&](auto&& fn) {
        std::ifstream in(root / "manifest.json");
        auto m = nlohmann::json::parse(in);
        fn(m);
        std::ofstream(root / "manifest.json") << m.dump();
    };

    SUBCASE("selector matching two nodes") {
        edit([](auto& m) { m["target_selector"] = ".item-card"; });
        CHECK(load_error(root) == Errc::SelectorNotUnique);
    }
    SUBCASE("selector matching nothing") {
        edit([](auto& m) { m["item_selectors"].push_back("#item-99"); });
        CHECK(load_error(root) == Errc::SelectorNotFound);
    }
    SUBCASE("bad colour") {
        edit([](auto& m) { m["baseline_style"]["background"] = "blue"; });
        CHECK(load_error(root) == Errc::MalformedManifest);
    }
    SUBCASE("missing document") {
        fs::remove(root / "page.html");
        CHECK(load_error(root) == Errc::MissingDocument);
    }
    SUBCASE("not JSON") {
        std::ofstream(root / "manifest.json") << "{ nope";
        CHECK(load_error(root) == Errc::MalformedManifest);
    }
}

TEST_CASE("catalog composition") {
    const auto catalog = default_catalog();
    CHECK(catalog.size() == 48);
    std::map<VariantFamily, int> per_family;
    std::set<std::string> ids;
    for (const auto& s : catalog) {
        ++per_family[s.family];
        ids.insert(s.id);
    }
    CHECK(ids.size() == 48);
    CHECK(per_family.size() == 8);
    CHECK(per_family[VariantFamily::background_color] == 11);
    CHECK(per_family[VariantFamily::text_color] == 6);
    CHECK(per_family[VariantFamily::font_family] == 10);
    CHECK(per_family[VariantFamily::font_size] == 5);
    CHECK(per_family[VariantFamily::position] == 4);
    CHECK(per_family[VariantFamily::card_size] == 3);
    CHECK(per_family[VariantFamily::clarity] == 7);
    CHECK(per_family[VariantFamily::order] == 2);
    for (const auto& id : test::referenced_variant_ids()) {
        INFO(id);
        CHECK(ids.count(id) == 1);
    }
    CHECK(filter_catalog(catalog, "background_color").size() == 11);
    CHECK(filter_catalog(catalog, "order_last").size() == 1);

    // catalog file round trip
    CHECK(parse_catalog(catalog_to_json(catalog)) == catalog);
}

TEST_CASE("a broken catalog file names the location") {
    try {
        (void)parse_catalog("[\n  {\"id\": \"x\",\n  \"family\": }\n]");
        FAIL("parsed");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MalformedCatalog);
        CHECK(e.detail().find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_catalog(R"([{"id": "x", "family": "nope", "mutation": {}}])"), Error);
}

TEST_CASE("mutations touch only the target") {
    const auto& shop = test::fixture("shop-grid");
    const auto& snap = *shop.snapshot;

    SUBCASE("background") {
        auto page = apply_variant(snap, shop.manifest, spec("background_4caf50"));
        const auto& target = resolve_unique(page.document.root(), shop.manifest.target_selector);
        CHECK(html::inline_style_of(target).get("background-color") == "#4caf50");
        CHECK(html::visible_text(page.document.root()) == html::visible_text(snap.document.root()));
        CHECK(verify_preservation(snap, page, shop.manifest).ok);
    }
    SUBCASE("order_last keeps the other items in sequence") {
        auto page = apply_variant(snap, shop.manifest, spec("order_last"));
        const auto& target = resolve_unique(page.document.root(), shop.manifest.target_selector);
        const auto siblings = target.parent()->element_children();
        CHECK(siblings.back() == &target);
        std::vector<std::string> order;
        for (auto* n : siblings) order.push_back(*n->attribute("id"));
        CHECK(order == std::vector<std::string>{"item-1", "item-2", "item-3", "item-4", "item-5", "item-6", "item-7",
                                                "item-8", "item-9", "item-0"});
    }
    SUBCASE("relocation passes the preservation check") {
        auto page = apply_variant(snap, shop.manifest, spec("position_header"));
        CHECK(verify_preservation(snap, page, shop.manifest).ok);
    }
    SUBCASE("style overrides are idempotent") {
        for (const auto& s : default_catalog()) {
            if (!std::holds_alternative<StyleOverride>(s.mutation)) continue;
            auto once = apply_variant(snap, shop.manifest, s);
            html::Document twice = once.document;
            apply_mutation(twice, shop.manifest, s);
            CHECK(html::equal_trees(twice.root(), once.document.root()));
        }
    }
    SUBCASE("a rewritten title is caught") {
        auto page = apply_variant(snap, shop.manifest, spec("background_4caf50"));
        auto& target = resolve_unique(page.document.root(), shop.manifest.target_selector);
        auto& title = const_cast<html::Node&>(*html::query_all(target, "h3 a").front());
        title.child(0).set_data("A different laptop");
        const auto report = verify_preservation(snap, page, shop.manifest);
        CHECK_FALSE(report.ok);
        REQUIRE(report.diffs.size() == 1);
        CHECK(report.diffs[0].kind == PreservationDiff::Kind::text);
    }
}

TEST_CASE("inapplicable variants") {
    const auto& news = test::fixture("news-list");
    try {
        (void)apply_variant(*news.snapshot, news.manifest, spec("image_clarity_blur_2px"));
        FAIL("applied");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NotApplicable);
    }
    try {
        (void)apply_variant(*news.snapshot, news.manifest, spec("position_banner"));
        FAIL("applied");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::AnchorSlotMissing);
    }
}

TEST_CASE("catalog ids and mutated properties are pairwise distinct") {
    const auto catalog = default_catalog();
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        for (std::size_t j = i + 1; j < catalog.size(); ++j) CHECK_FALSE(catalog[i].mutation == catalog[j].mutation);
    }
}

TEST_CASE("order and position variants conserve the item multiset") {
    for (const char* fixture : {"shop-grid", "hotel-list", "news-list"}) {
        const auto& f = test::fixture(fixture);
        for (const auto& s : default_catalog()) {
            if (s.family != VariantFamily::order && s.family != VariantFamily::position) continue;
            VariantPage page;
            try {
                page = apply_variant(*f.snapshot, f.manifest, s);
            } catch (const Error&) {
                continue;
            }
            std::multiset<std::string> before, after;
            for (const auto& sel : f.manifest.item_selectors) {
                before.insert(html::serialize(resolve_unique(f.snapshot->document.root(), sel)));
                after.insert(html::serialize(resolve_unique(page.document.root(), sel)));
            }
            CHECK(before == after);
        }
    }
}

TEST_CASE("target box tracks the element") {
    const auto& shop = test::fixture("shop-grid");
    SyntheticBackend backend;
    auto base = backend.open_session(original_page(shop));
    const auto b0 = target_bbox(shop.manifest, base->layout_index());
    CHECK(b0 == base->layout_index().box(shop.manifest.item_selectors[0]));

    auto last = backend.open_session(variant_page(shop, apply_variant(*shop.snapshot, shop.manifest, spec("order_last"))));
    const auto bl = target_bbox(shop.manifest, last->layout_index());
    for (std::size_t i = 1; i < shop.manifest.item_selectors.size(); ++i) {
        CHECK(bl.y > last->layout_index().box(shop.manifest.item_selectors[i]).y);
    }

    auto big = backend.open_session(
        variant_page(shop, apply_variant(*shop.snapshot, shop.manifest, spec("card_size_scale_1.5"))));
    const auto bb = target_bbox(shop.manifest, big->layout_index());
    CHECK(std::abs(bb.width - 1.5 * b0.width) <= 1);
    CHECK(std::abs(bb.height - 1.5 * b0.height) <= 1);

    LayoutIndex empty;
    CHECK_THROWS_AS((void)target_bbox(shop.manifest, empty), Error);
}
