#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "vaf/html/dom.hpp"
#include "vaf/snapshot.hpp"

namespace vaf {

enum class VariantFamily { background_color, text_color, font_family, font_size, position, card_size, clarity, order };

inline constexpr std::size_t kFamilyCount = 8;
inline constexpr std::size_t kDefaultCatalogSize = 48;

std::string_view to_string(VariantFamily f) noexcept;
std::optional<VariantFamily> parse_family(std::string_view name) noexcept;
std::vector<VariantFamily> all_families();

struct StyleOverride {
    std::vector<std::pair<std::string, std::string>> properties;
    bool operator==(const StyleOverride&) const = default;
};
struct Relocate {
    std::string anchor_slot;
    bool operator==(const Relocate&) const = default;
};
enum class ReorderPosition { middle, last };
struct Reorder {
    ReorderPosition position = ReorderPosition::last;
    bool operator==(const Reorder&) const = default;
};
enum class BlurScope { card, image };
struct Blur {
    BlurScope scope = BlurScope::card;
    double radius_px = 1;
    bool operator==(const Blur&) const = default;
};
struct Sharpen {
    bool operator==(const Sharpen&) const = default;
};
struct Scale {
    double factor = 1;
    bool operator==(const Scale&) const = default;
};

using Mutation = std::variant<StyleOverride, Relocate, Reorder, Blur, Sharpen, Scale>;

struct VariantSpec {
    std::string id;
    VariantFamily family = VariantFamily::background_color;
    Mutation mutation;

    bool operator==(const VariantSpec&) const = default;
};

/// A page mutated by one spec. Only the target's subtree (and, for moves,
/// its attachment point) differ from the base snapshot.
struct VariantPage {
    std::string base;
    VariantSpec spec;
    html::Document document;
    std::vector<std::string> provenance;
};

/// The canonical 48-entry catalog across the 8 families.
std::vector<VariantSpec> default_catalog();

/// Reads a catalog override (JSON array of specs). Throws
/// Error(MalformedCatalog) with a line/column or entry location.
std::vector<VariantSpec> load_catalog(const std::filesystem::path& path);
std::vector<VariantSpec> parse_catalog(std::string_view json_text);
std::string catalog_to_json(const std::vector<VariantSpec>& catalog);

/// Keeps specs whose family name or id equals `selector`.
std::vector<VariantSpec> filter_catalog(const std::vector<VariantSpec>& catalog, std::string_view selector);

/// Applies `spec` to a copy of the snapshot's document. Throws
/// Error(AnchorSlotMissing) or Error(NotApplicable).
VariantPage apply_variant(const Snapshot& snap, const TargetManifest& manifest, const VariantSpec& spec);

/// In-place form used by apply_variant; returns provenance lines.
std::vector<std::string> apply_mutation(html::Document& doc, const TargetManifest& manifest, const VariantSpec& spec);

/// CSS filter used for the card sharpen variant (3x3 sharpen kernel).
std::string_view sharpen_filter_css() noexcept;

struct PreservationDiff {
    enum class Kind { text, link, structure };
    Kind kind = Kind::structure;
    std::string path;
    std::string detail;
};

struct PreservationReport {
    bool ok = true;
    std::vector<PreservationDiff> diffs;
};

std::string_view to_string(PreservationDiff::Kind k) noexcept;

/// Checks that `variant` keeps the original's visible text, hyperlink
/// targets and element identities, allowing presentation changes on the
/// target subtree and (for position/order variants) a new attachment point.
PreservationReport verify_preservation(const html::Document& original, const VariantPage& variant,
                                       const TargetManifest& manifest);
PreservationReport verify_preservation(const Snapshot& original, const VariantPage& variant,
                                       const TargetManifest& manifest);

}  // namespace vaf
