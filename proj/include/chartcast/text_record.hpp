#pragma once

#include <string>
#include <string_view>

#include "chartcast/market_data.hpp"

namespace chartcast {

// One bar serialized as the text fed to the pretrained text encoder:
//   Date:DD/MM/YYYY Time:HH Close:<c> Open:<o> High:<h> Low:<l>
// Prices carry exactly one decimal place (trailing zero kept, no thousands
// separators); the hour is zero-padded. Lossless round trip for bars at
// 0.1-pip resolution.
struct TextRecord {
    std::string text;

    bool operator==(const TextRecord&) const = default;
};

TextRecord serialize_text(const OhlcBar& bar);

// Inverse of serialize_text; throws ParseError on any grammar deviation.
OhlcBar parse_text(const TextRecord& record);

}  // namespace chartcast
