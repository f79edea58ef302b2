// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

// WEM1 embedding store.
//
// File layout (little-endian):
//   [0,4)   ASCII "WEM1"
//   [4,8)   u32 dim
//   [8,12)  u32 count
//   [12]    u8 normalized flag (0 or 1)
//   count records of: u16 id length L, L bytes UTF-8 id, dim x f32
//
// Payloads are kept as f32 so write(read(file)) is bit-exact; lookups
// widen to f64.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wca/vector_math.hpp"

namespace wca {

inline constexpr std::size_t kWem1HeaderSize = 13;
inline constexpr double kNormalizedTolerance = 1e-3;

class PrecomputedStore {
public:
    PrecomputedStore(std::uint32_t dim, bool normalized);

    std::uint32_t dim() const noexcept { return dim_; }
    bool normalized() const noexcept { return normalized_; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool contains(std::string_view id) const;

    /// Ids in insertion order.
    const std::vector<std::string>& ids() const noexcept { return ids_; }

    /// Throws DomainError on duplicate/empty ids, DimensionError on wrong
    /// length, DomainError on non-finite values or a norm violation when the
    /// store is flagged normalized.
    void insert(std::string id, std::span<const float> values);
    void insert(std::string id, const Embedding& value);

    /// Stored vector widened to f64; MissingEmbeddingError if absent.
    Embedding lookup(std::string_view id) const;
    std::span<const float> raw(std::string_view id) const;

    friend bool operator==(const PrecomputedStore& a, const PrecomputedStore& b);

private:
    std::size_t index_of(std::string_view id) const;

    std::uint32_t dim_;
    bool normalized_;
    std::vector<std::string> ids_;
    std::vector<float> payload_;  // size() * dim_ values, row-major
    std::unordered_map<std::string, std::size_t> index_;
};

std::vector<std::uint8_t> encode_wem1(const PrecomputedStore& store);
/// Throws FormatError (with byte offset) on any structural problem.
PrecomputedStore decode_wem1(std::span<const std::uint8_t> bytes);

PrecomputedStore read_embedding_file(const std::filesystem::path& path);
void write_embedding_file(const PrecomputedStore& store, const std::filesystem::path& path);

}  // namespace wca
