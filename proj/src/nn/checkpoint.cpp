#include "gridcast/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace gridcast::nn {

namespace {

constexpr char kMagic[4] = {'G', 'C', 'K', 'P'};
constexpr std::uint32_t kVersionF32 = 1;
constexpr std::uint32_t kVersionF64 = 2;

template <typename T>
void write_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is, const std::string& path) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw IoError("truncated checkpoint file '" + path + "'");
    return v;
}

}  // namespace

void write_checkpoint_file(const std::string& path, const std::vector<CheckpointEntry>& entries,
                           bool wide) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open checkpoint '" + path + "' for writing");
    os.write(kMagic, 4);
    write_raw<std::uint32_t>(os, wide ? kVersionF64 : kVersionF32);
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
        if (e.name.size() > 0xffff) throw ConfigError("checkpoint tensor name too long");
        write_raw<std::uint16_t>(os, static_cast<std::uint16_t>(e.name.size()));
        os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
        if (e.shape.size() > 0xff) throw ConfigError("checkpoint tensor rank too large");
        write_raw<std::uint8_t>(os, static_cast<std::uint8_t>(e.shape.size()));
        for (std::size_t extent : e.shape) {
            write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(extent));
        }
        if (wide) {
            os.write(reinterpret_cast<const char*>(e.values.data()),
                     static_cast<std::streamsize>(e.values.size() * sizeof(double)));
        } else {
            for (double v : e.values) write_raw<float>(os, static_cast<float>(v));
        }
    }
    if (!os) throw IoError("failed writing checkpoint '" + path + "'");
}

std::vector<CheckpointEntry> read_checkpoint_file(const std::string& path, bool* wide) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint file '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw DataError("'" + path + "' is not a checkpoint file (bad magic)");
    }
    const auto version = read_raw<std::uint32_t>(is, path);
    if (version != kVersionF32 && version != kVersionF64) {
        throw DataError("unsupported checkpoint version " + std::to_string(version));
    }
    const bool is_wide = version == kVersionF64;
    if (wide != nullptr) *wide = is_wide;

    const auto count = read_raw<std::uint32_t>(is, path);
    std::vector<CheckpointEntry> entries;
    entries.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        CheckpointEntry e;
        const auto name_len = read_raw<std::uint16_t>(is, path);
        e.name.resize(name_len);
        is.read(e.name.data(), name_len);
        if (!is) throw IoError("truncated checkpoint file '" + path + "'");
        const auto rank = read_raw<std::uint8_t>(is, path);
        std::size_t size = 1;
        for (std::uint8_t r = 0; r < rank; ++r) {
            const auto extent = read_raw<std::uint32_t>(is, path);
            e.shape.push_back(extent);
            size *= extent;
        }
        e.values.resize(size);
        if (is_wide) {
            is.read(reinterpret_cast<char*>(e.values.data()),
                    static_cast<std::streamsize>(size * sizeof(double)));
            if (!is) throw IoError("truncated checkpoint file '" + path + "'");
        } else {
            for (std::size_t j = 0; j < size; ++j) {
                e.values[j] = static_cast<double>(read_raw<float>(is, path));
            }
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

}  // namespace gridcast::nn
