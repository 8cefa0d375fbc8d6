#include "vaf/error.hpp"

namespace vaf {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::MissingDocument: return "MissingDocument";
        case Errc::MalformedManifest: return "MalformedManifest";
        case Errc::SelectorNotUnique: return "SelectorNotUnique";
        case Errc::SelectorNotFound: return "SelectorNotFound";
        case Errc::TargetNotInLayout: return "TargetNotInLayout";
        case Errc::OverlappingItemBoxes: return "OverlappingItemBoxes";
        case Errc::HtmlParseError: return "HtmlParseError";
        case Errc::AnchorSlotMissing: return "AnchorSlotMissing";
        case Errc::NotApplicable: return "NotApplicable";
        case Errc::MalformedCatalog: return "MalformedCatalog";
        case Errc::BackendUnavailable: return "BackendUnavailable";
        case Errc::PageLoadTimeout: return "PageLoadTimeout";
        case Errc::SessionClosed: return "SessionClosed";
        case Errc::SelectorNotInPage: return "SelectorNotInPage";
        case Errc::RendererFailure: return "RendererFailure";
        case Errc::TemplateFieldMissing: return "TemplateFieldMissing";
        case Errc::EndpointUnreachable: return "EndpointUnreachable";
        case Errc::AuthFailure: return "AuthFailure";
        case Errc::ResponseTimeout: return "ResponseTimeout";
        case Errc::JudgeUnreachable: return "JudgeUnreachable";
        case Errc::MissingBaseline: return "MissingBaseline";
        case Errc::NotEnoughRows: return "NotEnoughRows";
        case Errc::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code), detail_(detail) {}

}  // namespace vaf
