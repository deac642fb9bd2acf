#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gridcast {

/// Base class for all workbench errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or usage (CLI exit code 1).
struct ConfigError : Error {
    using Error::Error;
};

/// Malformed or inconsistent input data (CLI exit code 1).
struct DataError : Error {
    using Error::Error;
};

/// Filesystem failure (CLI exit code 3).
struct IoError : Error {
    using Error::Error;
};

/// Child-process protocol violation in the external adapter.
struct ProtocolError : Error {
    using Error::Error;
};

/// Half-open index range [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - begin; }
    bool contains(const IndexRange& inner) const {
        return inner.begin >= begin && inner.end <= end;
    }
    bool operator==(const IndexRange&) const = default;
};

/// Shortest decimal string that parses back to exactly `v`.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

/// FNV-1a over bytes; used for config hashing and seed derivation.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 1469598103934665603ull);

/// Derive a child seed from a base seed and a label, stable across runs.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
    std::uint64_t h = fnv1a64(label);
    h ^= base + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

// Hourly UTC timestamps are carried as epoch seconds.
constexpr std::int64_t kSecondsPerHour = 3600;

/// Parse `YYYY-MM-DD[T ]HH:MM[:SS]` with optional `Z` or `+HH:MM` offset.
/// `had_zone` reports whether an explicit zone designator was present.
std::int64_t parse_iso8601(std::string_view text, bool* had_zone = nullptr);

/// Format epoch seconds as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(std::int64_t epoch_seconds);

}  // namespace gridcast
