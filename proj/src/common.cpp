#include "gridcast/common.hpp"

#include <array>
#include <cctype>
#include <charconv>

namespace gridcast {

double parse_double(std::string_view text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    while (first != last && std::isspace(static_cast<unsigned char>(*first))) ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{}) {
        throw DataError("not a number: '" + std::string(text) + "'");
    }
    while (ptr != last && std::isspace(static_cast<unsigned char>(*ptr))) ++ptr;
    if (ptr != last) {
        throw DataError("trailing characters after number: '" + std::string(text) + "'");
    }
    return value;
}

std::int64_t parse_int(std::string_view text) {
    std::int64_t value = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    while (first != last && std::isspace(static_cast<unsigned char>(*first))) ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{}) {
        throw DataError("not an integer: '" + std::string(text) + "'");
    }
    while (ptr != last && std::isspace(static_cast<unsigned char>(*ptr))) ++ptr;
    if (ptr != last) {
        throw DataError("trailing characters after integer: '" + std::string(text) + "'");
    }
    return value;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

// Howard Hinnant's days-from-civil algorithm; valid for all proleptic
// Gregorian dates of interest here.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

unsigned parse_fixed_digits(std::string_view text, std::size_t pos, std::size_t count,
                            std::string_view what) {
    if (pos + count > text.size()) {
        throw DataError("truncated timestamp: '" + std::string(text) + "'");
    }
    unsigned value = 0;
    for (std::size_t i = 0; i < count; ++i) {
        char c = text[pos + i];
        if (c < '0' || c > '9') {
            throw DataError("bad " + std::string(what) + " in timestamp: '" + std::string(text) +
                            "'");
        }
        value = value * 10 + static_cast<unsigned>(c - '0');
    }
    return value;
}

}  // namespace

std::int64_t parse_iso8601(std::string_view text, bool* had_zone) {
    // Trim surrounding whitespace.
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
        text.remove_prefix(1);
    }
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
        text.remove_suffix(1);
    }
    if (text.size() < 16) {
        throw DataError("unrecognized timestamp: '" + std::string(text) + "'");
    }

    bool negative_year = false;
    std::size_t pos = 0;
    if (text[pos] == '-') {
        negative_year = true;
        ++pos;
    }
    unsigned year = parse_fixed_digits(text, pos, 4, "year");
    pos += 4;
    if (pos >= text.size() || text[pos] != '-') {
        throw DataError("expected '-' after year: '" + std::string(text) + "'");
    }
    ++pos;
    unsigned month = parse_fixed_digits(text, pos, 2, "month");
    pos += 2;
    if (pos >= text.size() || text[pos] != '-') {
        throw DataError("expected '-' after month: '" + std::string(text) + "'");
    }
    ++pos;
    unsigned day = parse_fixed_digits(text, pos, 2, "day");
    pos += 2;
    if (pos >= text.size() || (text[pos] != 'T' && text[pos] != ' ')) {
        throw DataError("expected date/time separator: '" + std::string(text) + "'");
    }
    ++pos;
    unsigned hour = parse_fixed_digits(text, pos, 2, "hour");
    pos += 2;
    if (pos >= text.size() || text[pos] != ':') {
        throw DataError("expected ':' after hour: '" + std::string(text) + "'");
    }
    ++pos;
    unsigned minute = parse_fixed_digits(text, pos, 2, "minute");
    pos += 2;
    unsigned second = 0;
    if (pos < text.size() && text[pos] == ':') {
        ++pos;
        second = parse_fixed_digits(text, pos, 2, "second");
        pos += 2;
    }

    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 ||
        second > 59) {
        throw DataError("timestamp field out of range: '" + std::string(text) + "'");
    }

    std::int64_t offset_seconds = 0;
    bool zone = false;
    if (pos < text.size()) {
        char c = text[pos];
        if (c == 'Z' || c == 'z') {
            zone = true;
            ++pos;
        } else if (c == '+' || c == '-') {
            bool offset_negative = (c == '-');
            ++pos;
            unsigned oh = parse_fixed_digits(text, pos, 2, "offset hour");
            pos += 2;
            unsigned om = 0;
            if (pos < text.size() && text[pos] == ':') {
                ++pos;
                om = parse_fixed_digits(text, pos, 2, "offset minute");
                pos += 2;
            } else if (pos + 2 <= text.size()) {
                om = parse_fixed_digits(text, pos, 2, "offset minute");
                pos += 2;
            }
            if (oh > 23 || om > 59) {
                throw DataError("timestamp offset out of range: '" + std::string(text) + "'");
            }
            offset_seconds = static_cast<std::int64_t>(oh) * 3600 + om * 60;
            if (offset_negative) offset_seconds = -offset_seconds;
            zone = true;
        }
    }
    if (pos != text.size()) {
        throw DataError("trailing characters in timestamp: '" + std::string(text) + "'");
    }

    std::int64_t y = negative_year ? -static_cast<std::int64_t>(year)
                                   : static_cast<std::int64_t>(year);
    std::int64_t days = days_from_civil(y, month, day);
    std::int64_t epoch =
        days * 86400 + static_cast<std::int64_t>(hour) * 3600 + minute * 60 + second;
    epoch -= offset_seconds;  // local = UTC + offset  =>  UTC = local - offset
    if (had_zone != nullptr) *had_zone = zone;
    return epoch;
}

std::string format_iso8601(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t year = 0;
    unsigned month = 0, day = 0;
    civil_from_days(days, year, month, day);
    unsigned hour = static_cast<unsigned>(rem / 3600);
    unsigned minute = static_cast<unsigned>((rem % 3600) / 60);
    unsigned second = static_cast<unsigned>(rem % 60);

    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02u:%02u:%02uZ",
                  static_cast<long long>(year), month, day, hour, minute, second);
    return std::string(buf);
}

}  // namespace gridcast
