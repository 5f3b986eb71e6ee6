#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace chartcast {

struct CivilTime {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    int hour = 0;   // 0..23
};

// Calendar timestamp at hour resolution, stored as hours since the Unix
// epoch (no time zone; market data is taken as-is from the feed).
class HourStamp {
public:
    HourStamp() = default;
    explicit HourStamp(std::int64_t hours_since_epoch) : hours_(hours_since_epoch) {}

    static HourStamp from_civil(int year, int month, int day, int hour);

    // Accepts "YYYY-MM-DD HH:00:00" and "YYYY-MM-DD HH:MM:SS" with MM:SS
    // required to be zero. Throws ParseError otherwise.
    static HourStamp parse(std::string_view text);

    CivilTime civil() const;

    // "YYYY-MM-DD HH:00:00" — the canonical CSV / JSON form.
    std::string to_string() const;

    // "YYYY-MM-DD_HH" — filesystem-safe tag used in artifact file names.
    std::string file_tag() const;

    std::int64_t hours() const { return hours_; }

    HourStamp operator+(std::int64_t h) const { return HourStamp(hours_ + h); }
    HourStamp operator-(std::int64_t h) const { return HourStamp(hours_ - h); }
    std::int64_t operator-(HourStamp other) const { return hours_ - other.hours_; }

    auto operator<=>(const HourStamp&) const = default;

private:
    std::int64_t hours_ = 0;
};

}  // namespace chartcast
