// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "deskdiff/errors.hpp"
#include "deskdiff/tensor.hpp"

namespace deskdiff {

// "NVT1" | u8 dtype | u8 ndim | ndim x u32 dims | row-major payload, all little-endian.
enum class DType : std::uint8_t { f32 = 1, f64 = 2 };

inline constexpr std::array<char, 4> kTensorMagic{'N', 'V', 'T', '1'};

inline std::size_t dtype_size(DType d) { return d == DType::f32 ? 4 : 8; }

namespace detail {

template <typename UInt>
void put_le(std::ostream& out, UInt v) {
    for (std::size_t i = 0; i < sizeof(UInt); ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename UInt>
UInt get_le(std::istream& in) {
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        const int c = in.get();
        if (c == std::char_traits<char>::eof()) throw DataError("tensor file: truncated");
        v |= static_cast<UInt>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}

}  // namespace detail

inline void write_tensor(std::ostream& out, const Tensor& t, DType dtype = DType::f64) {
    if (t.shape.size() > std::numeric_limits<std::uint8_t>::max()) throw ParameterError("tensor file: too many dims");
    out.write(kTensorMagic.data(), kTensorMagic.size());
    out.put(static_cast<char>(dtype));
    out.put(static_cast<char>(t.shape.size()));
    for (std::size_t d : t.shape) {
        if (d > std::numeric_limits<std::uint32_t>::max()) throw ParameterError("tensor file: dim exceeds u32");
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    }
    for (double v : t.data) {
        if (dtype == DType::f32) {
            detail::put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        } else {
            detail::put_le(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    if (!out) throw DataError("tensor file: write failed");
}

struct LoadedTensor {
    Tensor tensor;
    DType dtype = DType::f64;
};

inline LoadedTensor read_tensor(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kTensorMagic) throw DataError("tensor file: bad magic");
    const int code = in.get();
    if (code != 1 && code != 2) throw DataError("tensor file: unknown dtype code");
    const int ndim = in.get();
    if (ndim == std::char_traits<char>::eof()) throw DataError("tensor file: truncated");
    LoadedTensor out;
    out.dtype = static_cast<DType>(code);
    Shape shape(static_cast<std::size_t>(ndim));
    for (auto& d : shape) d = detail::get_le<std::uint32_t>(in);
    std::vector<double> data(element_count(shape));
    for (double& v : data) {
        if (out.dtype == DType::f32) {
            v = std::bit_cast<float>(detail::get_le<std::uint32_t>(in));
        } else {
            v = std::bit_cast<double>(detail::get_le<std::uint64_t>(in));
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) throw DataError("tensor file: trailing bytes after payload");
    out.tensor = Tensor(std::move(shape), std::move(data));
    return out;
}

inline void save_tensor(const std::string& path, const Tensor& t, DType dtype = DType::f64) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    write_tensor(out, t, dtype);
}

inline LoadedTensor load_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_tensor(in);
}

}  // namespace deskdiff
