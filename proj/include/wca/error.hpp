// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wca {

/// Broad error category, used by the CLI to pick an exit code.
enum class ErrorKind {
    Domain,      // bad numeric input (zero vector, empty set, ...)
    Dimension,   // mismatched vector/matrix shapes
    Config,      // invalid configuration or flag combination
    Ingestion,   // malformed description files / manifests
    Format,      // malformed binary embedding files
    Io,          // filesystem failures
    Missing,     // id not present in an embedding store
    Bounds,      // crop region outside the image
    CacheInvalid,
    ExplanationUnavailable,
    Construction,  // theorem-lab instance could not be built
    Precondition,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define WCA_DEFINE_ERROR(Name, Kind)                                          \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
    }

WCA_DEFINE_ERROR(DomainError, Domain);
WCA_DEFINE_ERROR(DimensionError, Dimension);
WCA_DEFINE_ERROR(ConfigError, Config);
WCA_DEFINE_ERROR(IngestionError, Ingestion);
WCA_DEFINE_ERROR(IoError, Io);
WCA_DEFINE_ERROR(BoundsError, Bounds);
WCA_DEFINE_ERROR(CacheInvalidError, CacheInvalid);
WCA_DEFINE_ERROR(ExplanationUnavailableError, ExplanationUnavailable);
WCA_DEFINE_ERROR(ConstructionError, Construction);
WCA_DEFINE_ERROR(PreconditionError, Precondition);

#undef WCA_DEFINE_ERROR

class MissingEmbeddingError : public Error {
public:
    explicit MissingEmbeddingError(std::string id)
        : Error(ErrorKind::Missing, "missing embedding for id '" + id + "'"), id_(std::move(id)) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

/// Malformed WEM1 data; carries the byte offset where parsing failed.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : Error(ErrorKind::Format, what + " (at byte offset " + std::to_string(offset) + ")"),
          detail_(what),
          offset_(offset) {}
    std::uint64_t offset() const noexcept { return offset_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::uint64_t offset_;
};

}  // namespace wca
