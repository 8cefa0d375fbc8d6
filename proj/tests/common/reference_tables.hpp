#pragma once

// Published top/bottom-10 rankings for two agents, used as ranking and
// catalog fixtures. Rates are given to three decimals.

#include <string>
#include <vector>

namespace vaf::test {

struct RankedEntry {
    int rank;
    const char* id;
    int tcr_milli;
    int tmr_milli;
};

struct RankedColumn {
    const char* agent;
    int baseline_tcr_milli;
    int baseline_tmr_milli;
    std::vector<RankedEntry> entries;  // ranks 1-10 then 39-48
};

inline const RankedColumn& ui_tars_column() {
    static const RankedColumn c{"ui-tars-7b", 256, 556,
                                {{1, "fontSize_24px", 409, 580},
                                 {2, "fontSize_22px", 376, 664},
                                 {3, "fontFamily_courier", 369, 692},
                                 {4, "fontFamily_helvetica", 367, 684},
                                 {5, "fontFamily_roboto", 365, 642},
                                 {6, "background_1976d2", 363, 604},
                                 {7, "fontFamily_times", 342, 704},
                                 {8, "fontFamily_opensans", 334, 580},
                                 {9, "card_size_scale_0.8", 330, 564},
                                 {10, "fontFamily_georgia", 327, 604},
                                 {39, "image_clarity_blur_4px", 188, 556},
                                 {40, "order_middle", 188, 427},
                                 {41, "fontSize_14px", 178, 576},
                                 {42, "background_e91e63", 175, 580},
                                 {43, "fontFamily_jetbrains-mono", 175, 470},
                                 {44, "image_clarity_blur_1px", 173, 552},
                                 {45, "card_clarity_sharp", 168, 528},
                                 {46, "order_last", 110, 286},
                                 {47, "position_header", 80, 400},
                                 {48, "position_sidebar", 60, 155}}};
    return c;
}

inline const RankedColumn& qwen3vl_column() {
    static const RankedColumn c{"qwen3vl-8b", 320, 550,
                                {{1, "card_size_scale_1.5", 680, 652},
                                 {2, "background_4caf50", 610, 702},
                                 {3, "background_6f42c1", 550, 544},
                                 {4, "background_ffeb3b", 490, 612},
                                 {5, "fontSize_24px", 430, 646},
                                 {6, "background_ff9800", 410, 674},
                                 {7, "textColor_111111", 400, 534},
                                 {8, "fontSize_22px", 390, 528},
                                 {9, "fontFamily_jetbrains-mono", 340, 588},
                                 {10, "fontSize_18px", 330, 648},
                                 {39, "order_last", 120, 420},
                                 {40, "fontFamily_helvetica", 110, 588},
                                 {41, "fontFamily_arial", 100, 646},
                                 {42, "card_size_scale_0.8", 100, 512},
                                 {43, "image_clarity_blur_4px", 100, 588},
                                 {44, "fontFamily_comic", 90, 588},
                                 {45, "fontSize_14px", 90, 586},
                                 {46, "position_sidebar", 80, 253},
                                 {47, "image_clarity_blur_2px", 70, 598},
                                 {48, "image_clarity_blur_1px", 60, 566}}};
    return c;
}

/// Every variant id that appears in the published top/bottom-10 tables of all four agents.
inline const std::vector<std::string>& referenced_variant_ids() {
    static const std::vector<std::string> ids{
        "fontSize_24px", "fontSize_22px", "fontSize_18px", "fontSize_16px", "fontSize_14px",
        "fontFamily_courier", "fontFamily_helvetica", "fontFamily_roboto", "fontFamily_times", "fontFamily_opensans",
        "fontFamily_georgia", "fontFamily_jetbrains-mono", "fontFamily_arial", "fontFamily_comic",
        "fontFamily_merriweather", "background_1976d2", "background_e91e63", "background_4caf50", "background_6f42c1",
        "background_ffeb3b", "background_ff9800", "background_f44336", "background_00bcd4", "background_2196f3",
        "background_42a5f5", "background_9c27b0", "textColor_111111", "textColor_dc3545", "card_size_scale_0.8",
        "card_size_scale_1.5", "image_clarity_blur_1px", "image_clarity_blur_2px", "image_clarity_blur_4px",
        "card_clarity_blur_1px", "card_clarity_blur_2px", "card_clarity_blur_4px", "card_clarity_sharp",
        "order_middle", "order_last", "position_header", "position_sidebar", "position_banner", "position_spotlight"};
    return ids;
}

}  // namespace vaf::test
