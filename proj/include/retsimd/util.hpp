// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace retsimd {

std::uint64_t fnv1a64(std::string_view s);

/// SplitMix64 stream; portable across platforms and standard libraries.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    /// Uniform in [0, 1).
    double uniform();
    /// Standard normal via Box-Muller.
    double normal();

private:
    std::uint64_t state_;
};

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Parsed `http://host[:port][/path]` endpoint.
struct HttpEndpoint {
    std::string scheme_host_port;
    std::string path;
};
HttpEndpoint parse_http_url(std::string_view url);

}  // namespace retsimd
