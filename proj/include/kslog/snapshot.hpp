/**
 * @file snapshot.hpp
 * @brief Binary snapshot records for single fields.
 *
 * Layout (all little-endian):
 *   "KSLG" | u16 version = 1 | u8 dims | u32 cells per axis (dims times)
 *   | f64 time | f64 cell values, row-major
 *
 * Extents are not stored; the reader supplies the grid and the cell counts
 * are checked against it. A trajectory file is a plain concatenation of
 * records (u then v for each saved time).
 */
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kslog/grid.hpp"

namespace kslog {

inline constexpr std::array<char, 4> kSnapshotMagic{'K', 'S', 'L', 'G'};
inline constexpr std::uint16_t kSnapshotVersion = 1;

namespace detail {

template <class T>
void put_le(std::ostream& os, T value) {
    std::array<unsigned char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> bytes{};
    if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T)))
        throw std::runtime_error("snapshot: unexpected end of data");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

}  // namespace detail

struct Snapshot {
    double time = 0.0;
    Field field;
};

inline void write_snapshot(std::ostream& os, const Field& f, double time) {
    os.write(kSnapshotMagic.data(), 4);
    detail::put_le<std::uint16_t>(os, kSnapshotVersion);
    detail::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(f.grid.dims()));
    for (int d = 0; d < f.grid.dims(); ++d) detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.cells(d)));
    detail::put_le<double>(os, time);
    for (double x : f.values) detail::put_le<double>(os, x);
}

/// Reads one record; returns false at a clean end of stream.
inline bool read_snapshot(std::istream& is, const Grid& grid, Snapshot& out) {
    std::array<char, 4> magic{};
    is.read(magic.data(), 4);
    if (is.gcount() == 0 && is.eof()) return false;
    if (is.gcount() != 4 || magic != kSnapshotMagic) throw std::runtime_error("snapshot: bad magic bytes");
    const auto version = detail::get_le<std::uint16_t>(is);
    if (version != kSnapshotVersion) throw std::runtime_error("snapshot: unsupported version " + std::to_string(version));
    const auto dims = detail::get_le<std::uint8_t>(is);
    if (dims != grid.dims()) throw ShapeError("snapshot: dimension does not match grid");
    for (int d = 0; d < dims; ++d) {
        const auto n = detail::get_le<std::uint32_t>(is);
        if (static_cast<int>(n) != grid.cells(d)) throw ShapeError("snapshot: cell count does not match grid");
    }
    out.time = detail::get_le<double>(is);
    out.field = Field(grid);
    for (double& x : out.field.values) x = detail::get_le<double>(is);
    return true;
}

inline void save_snapshot(const std::string& path, const Field& f, double time) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_snapshot(os, f, time);
}

inline Snapshot load_snapshot(const std::string& path, const Grid& grid) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    Snapshot s;
    if (!read_snapshot(is, grid, s)) throw std::runtime_error("snapshot: empty file " + path);
    return s;
}

}  // namespace kslog
