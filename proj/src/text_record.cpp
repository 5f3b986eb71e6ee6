#include "chartcast/text_record.hpp"

#include <cstdio>

#include "chartcast/errors.hpp"

namespace chartcast {

TextRecord serialize_text(const OhlcBar& bar) {
    const CivilTime c = bar.ts.civil();
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "Date:%02d/%02d/%04d Time:%02d Close:%.1f Open:%.1f High:%.1f Low:%.1f", c.day,
                  c.month, c.year, c.hour, bar.close, bar.open, bar.high, bar.low);
    return TextRecord{buf};
}

OhlcBar parse_text(const TextRecord& record) {
    int day = 0, month = 0, year = 0, hour = 0;
    double close = 0, open = 0, high = 0, low = 0;
    int consumed = 0;
    const int n = std::sscanf(record.text.c_str(),
                              "Date:%2d/%2d/%4d Time:%2d Close:%lf Open:%lf High:%lf Low:%lf%n",
                              &day, &month, &year, &hour, &close, &open, &high, &low, &consumed);
    if (n != 8 || static_cast<std::size_t>(consumed) != record.text.size()) {
        throw ParseError("text record does not match the serialization grammar: '" + record.text +
                         "'");
    }
    OhlcBar bar;
    bar.ts = HourStamp::from_civil(year, month, day, hour);
    bar.close = close;
    bar.open = open;
    bar.high = high;
    bar.low = low;
    return bar;
}

}  // namespace chartcast
