#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vaf {

/// Every failure the harness can surface, grouped by the module that raises it.
enum class Errc {
    // snapshot-store
    MissingDocument,
    MalformedManifest,
    SelectorNotUnique,
    SelectorNotFound,
    TargetNotInLayout,
    OverlappingItemBoxes,
    HtmlParseError,
    // variant-engine
    AnchorSlotMissing,
    NotApplicable,
    MalformedCatalog,
    // page-renderer
    BackendUnavailable,
    PageLoadTimeout,
    SessionClosed,
    SelectorNotInPage,
    RendererFailure,
    // agent-gateway
    TemplateFieldMissing,
    EndpointUnreachable,
    AuthFailure,
    ResponseTimeout,
    // mention-judge
    JudgeUnreachable,
    // metrics-report
    MissingBaseline,
    NotEnoughRows,
    // cli
    InvalidConfig,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail);

    [[nodiscard]] Errc code() const noexcept { return code_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

}  // namespace vaf
