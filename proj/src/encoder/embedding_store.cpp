// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "wca/embedding_store.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include "wca/error.hpp"

namespace wca {
namespace {

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t extra = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + extra >= s.size()) return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            const auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // Overlong encodings, surrogates and out-of-range code points.
        if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
            cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
            return false;
        i += extra + 1;
    }
    return true;
}

double norm_of(std::span<const float> v) {
    double acc = 0.0;
    for (float x : v) acc += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(acc);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xFF));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    void need(std::size_t n, const char* what) const {
        if (remaining() < n) throw FormatError(std::string("truncated ") + what, pos_);
    }
    std::uint8_t u8() { return bytes_[pos_++]; }
    std::uint16_t u16() {
        const std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(bytes_[pos_ + k]) << (8 * k);
        pos_ += 4;
        return v;
    }
    std::string_view str(std::size_t n) {
        std::string_view s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

PrecomputedStore::PrecomputedStore(std::uint32_t dim, bool normalized) : dim_(dim), normalized_(normalized) {
    if (dim == 0) throw DomainError("embedding store dim must be >= 1");
}

bool PrecomputedStore::contains(std::string_view id) const { return index_.contains(std::string(id)); }

std::size_t PrecomputedStore::index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw MissingEmbeddingError(std::string(id));
    return it->second;
}

void PrecomputedStore::insert(std::string id, std::span<const float> values) {
    if (id.empty()) throw DomainError("embedding id must be non-empty");
    if (id.size() > std::numeric_limits<std::uint16_t>::max())
        throw DomainError("embedding id longer than 65535 bytes");
    if (!valid_utf8(id)) throw DomainError("embedding id is not valid UTF-8");
    if (values.size() != dim_)
        throw DimensionError("embedding '" + id + "' has dim " + std::to_string(values.size()) +
                             ", store dim is " + std::to_string(dim_));
    for (float v : values)
        if (!std::isfinite(v)) throw DomainError("embedding '" + id + "' has a non-finite value");
    if (normalized_ && std::abs(norm_of(values) - 1.0) > kNormalizedTolerance)
        throw DomainError("embedding '" + id + "' is not unit-norm in a normalized store");
    if (index_.contains(id)) throw DomainError("duplicate embedding id '" + id + "'");
    index_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    payload_.insert(payload_.end(), values.begin(), values.end());
}

void PrecomputedStore::insert(std::string id, const Embedding& value) {
    std::vector<float> narrow(value.dim());
    for (std::size_t i = 0; i < value.dim(); ++i) narrow[i] = static_cast<float>(value[i]);
    insert(std::move(id), narrow);
}

std::span<const float> PrecomputedStore::raw(std::string_view id) const {
    const std::size_t i = index_of(id);
    return std::span<const float>(payload_).subspan(i * dim_, dim_);
}

Embedding PrecomputedStore::lookup(std::string_view id) const {
    const auto r = raw(id);
    return Embedding(std::vector<double>(r.begin(), r.end()));
}

bool operator==(const PrecomputedStore& a, const PrecomputedStore& b) {
    if (a.dim_ != b.dim_ || a.normalized_ != b.normalized_ || a.ids_ != b.ids_) return false;
    if (a.payload_.size() != b.payload_.size()) return false;
    for (std::size_t i = 0; i < a.payload_.size(); ++i)
        if (std::bit_cast<std::uint32_t>(a.payload_[i]) != std::bit_cast<std::uint32_t>(b.payload_[i]))
            return false;
    return true;
}

std::vector<std::uint8_t> encode_wem1(const PrecomputedStore& store) {
    std::vector<std::uint8_t> out;
    out.reserve(kWem1HeaderSize + store.size() * (2 + 16 + 4 * store.dim()));
    for (char c : std::string_view("WEM1")) out.push_back(static_cast<std::uint8_t>(c));
    put_u32(out, store.dim());
    put_u32(out, static_cast<std::uint32_t>(store.size()));
    out.push_back(store.normalized() ? 1 : 0);
    for (const auto& id : store.ids()) {
        put_u16(out, static_cast<std::uint16_t>(id.size()));
        for (char c : id) out.push_back(static_cast<std::uint8_t>(c));
        for (float v : store.raw(id)) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

PrecomputedStore decode_wem1(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    in.need(4, "magic");
    if (in.str(4) != "WEM1") throw FormatError("bad magic, expected \"WEM1\"", 0);
    in.need(9, "header");
    const std::size_t dim_at = in.offset();
    const std::uint32_t dim = in.u32();
    if (dim == 0) throw FormatError("dim must be >= 1", dim_at);
    const std::uint32_t count = in.u32();
    const std::size_t flag_at = in.offset();
    const std::uint8_t flag = in.u8();
    if (flag > 1) throw FormatError("normalized flag must be 0 or 1", flag_at);

    PrecomputedStore store(dim, flag == 1);
    std::vector<float> values(dim);
    for (std::uint32_t r = 0; r < count; ++r) {
        const std::size_t record_at = in.offset();
        in.need(2, "record id length");
        const std::uint16_t len = in.u16();
        if (len == 0) throw FormatError("empty id in record " + std::to_string(r), record_at);
        in.need(len, "record id");
        std::string id(in.str(len));
        const std::size_t values_at = in.offset();
        if (in.remaining() < std::size_t{4} * dim)
            throw FormatError("truncated record '" + id + "': expected " + std::to_string(dim) +
                                  " f32 values",
                              values_at);
        for (std::uint32_t k = 0; k < dim; ++k) values[k] = std::bit_cast<float>(in.u32());
        try {
            store.insert(std::move(id), values);
        } catch (const Error& e) {
            throw FormatError(e.what(), record_at);
        }
    }
    if (in.remaining() != 0)
        throw FormatError("trailing bytes after " + std::to_string(count) + " records", in.offset());
    return store;
}

PrecomputedStore read_embedding_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open embedding file '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    try {
        return decode_wem1(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.detail(), e.offset());
    }
}

void write_embedding_file(const PrecomputedStore& store, const std::filesystem::path& path) {
    const auto bytes = encode_wem1(store);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write embedding file '" + path.string() + "'");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace wca
