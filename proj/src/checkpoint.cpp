// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/checkpoint.hpp"

#include <fstream>

#include "binary_io.hpp"
#include "retsimd/error.hpp"

namespace retsimd {

namespace {

constexpr char kMagic[4] = {'R', 'S', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void write_matrix(detail::ByteWriter& w, const Matrix& m) {
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) w.f64(m.data()[i]);
}

Matrix read_matrix(detail::ByteReader& r) {
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f64();
    return m;
}

void write_params(detail::ByteWriter& w, const ParameterSet& ps) {
    w.u32(static_cast<std::uint32_t>(ps.size()));
    for (const auto& p : ps.items()) {
        w.str(p.name);
        write_matrix(w, p.value);
    }
}

ParameterSet read_params(detail::ByteReader& r) {
    ParameterSet ps;
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        std::string name = r.str();
        ps.add(name, read_matrix(r));
    }
    return ps;
}

}  // namespace

std::vector<std::uint8_t> serialize(const Checkpoint& ckpt) {
    detail::ByteWriter w;
    w.raw(kMagic, 4);
    w.u32(kVersion);
    w.u64(ckpt.iteration);
    write_params(w, ckpt.detector_params);
    write_params(w, ckpt.generator_params);
    w.u32(static_cast<std::uint32_t>(ckpt.metrics.size()));
    for (const auto& [k, v] : ckpt.metrics) {
        w.str(k);
        w.f64(v);
    }
    w.u32(static_cast<std::uint32_t>(ckpt.extra_tensors.size()));
    for (const auto& [k, m] : ckpt.extra_tensors) {
        w.str(k);
        write_matrix(w, m);
    }
    w.str(ckpt.state);
    return w.take();
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
    detail::ByteReader r(bytes);
    if (r.raw(4) != std::string(kMagic, 4)) throw IngestionError("not a checkpoint file");
    if (r.u32() != kVersion) throw IngestionError("unsupported checkpoint version");
    Checkpoint c;
    c.iteration = r.u64();
    c.detector_params = read_params(r);
    c.generator_params = read_params(r);
    const std::uint32_t nm = r.u32();
    for (std::uint32_t i = 0; i < nm; ++i) {
        std::string k = r.str();
        c.metrics[k] = r.f64();
    }
    const std::uint32_t ne = r.u32();
    for (std::uint32_t i = 0; i < ne; ++i) {
        std::string k = r.str();
        c.extra_tensors[k] = read_matrix(r);
    }
    c.state = r.str();
    if (!r.done()) throw IngestionError("trailing bytes in checkpoint");
    return c;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError("cannot open " + path.string());
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + path.string());
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    write_file_bytes(path, serialize(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return deserialize_checkpoint(read_file_bytes(path));
}

}  // namespace retsimd
