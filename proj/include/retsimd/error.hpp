// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace retsimd {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Input data parsed but failed a domain invariant (duplicate id, bad label).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Input data could not be parsed at all.
class IngestionError : public Error {
public:
    using Error::Error;
};

/// A computation produced a non-finite value.
class NumericError : public Error {
public:
    using Error::Error;
};

/// The pipeline is in a state that cannot serve the request (e.g. cache miss).
class PipelineError : public Error {
public:
    using Error::Error;
};

/// A generator backend failed for a given segment.
class GenerationError : public Error {
public:
    GenerationError(const std::string& what, std::size_t segment_index)
        : Error(what), segment_index_(segment_index) {}
    std::size_t segment_index() const noexcept { return segment_index_; }

private:
    std::size_t segment_index_;
};

/// Configuration rejected by schema validation.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace retsimd
