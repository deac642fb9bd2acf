#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gridcast/nn/tensor.hpp"

namespace gridcast::nn {

/// Width-agnostic view of one stored tensor (values widened to double).
struct CheckpointEntry {
    std::string name;
    Shape shape;
    std::vector<double> values;
};

/// Binary layout: magic "GCKP"; version u32 (1 = float32 payload, 2 =
/// float64); count u32; then per tensor: name length u16, name bytes, rank
/// u8, extents u32 x rank, little-endian payload.
void write_checkpoint_file(const std::string& path, const std::vector<CheckpointEntry>& entries,
                           bool wide);
std::vector<CheckpointEntry> read_checkpoint_file(const std::string& path, bool* wide = nullptr);

/// Save named parameters; payload width follows T exactly (bitwisedump).
template <typename T>
void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, Tensor<T>>>& tensors) {
    std::vector<CheckpointEntry> entries;
    entries.reserve(tensors.size());
    for (const auto& [name, tensor] : tensors) {
        CheckpointEntry e;
        e.name = name;
        e.shape = tensor.shape();
        e.values.assign(tensor.value().begin(), tensor.value().end());
        entries.push_back(std::move(e));
    }
    write_checkpoint_file(path, entries, sizeof(T) == 8);
}

/// Load into existing tensors; names, shapes, and payload width must match.
template <typename T>
void load_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, Tensor<T>>>& tensors) {
    bool wide = false;
    auto entries = read_checkpoint_file(path, &wide);
    if (wide != (sizeof(T) == 8)) {
        throw DataError("checkpoint '" + path + "' stores " +
                        std::string(wide ? "float64" : "float32") +
                        " but the model runs the other precision");
    }
    if (entries.size() != tensors.size()) {
        throw DataError("checkpoint '" + path + "' holds " + std::to_string(entries.size()) +
                        " tensors, expected " + std::to_string(tensors.size()));
    }
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const auto& [name, tensor] = tensors[i];
        if (entries[i].name != name) {
            throw DataError("checkpoint tensor " + std::to_string(i) + " is '" +
                            entries[i].name + "', expected '" + name + "'");
        }
        if (entries[i].shape != tensor.shape()) {
            throw DataError("checkpoint tensor '" + name + "' has shape " +
                            shape_str(entries[i].shape) + ", expected " +
                            shape_str(tensor.shape()));
        }
        for (std::size_t j = 0; j < tensor.size(); ++j) {
            tensor.value()[j] = static_cast<T>(entries[i].values[j]);
        }
    }
}

}  // namespace gridcast::nn
