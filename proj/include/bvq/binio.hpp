#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "bvq/error.hpp"

namespace bvq::io {

// Little-endian primitives over iostreams. Reads throw DataError on
// truncation so callers never see partially-filled structures.

inline void write_bytes(std::ostream& os, const void* p, size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!os) data_error("write failed");
}

inline void read_bytes(std::istream& is, void* p, size_t n, const char* what) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(is.gcount()) != n)
        data_error(std::string("truncated file while reading ") + what);
}

inline void write_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    write_bytes(os, b, 4);
}

inline uint32_t read_u32(std::istream& is, const char* what) {
    unsigned char b[4];
    read_bytes(is, b, 4, what);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

inline void write_u8(std::ostream& os, uint8_t v) { write_bytes(os, &v, 1); }

inline uint8_t read_u8(std::istream& is, const char* what) {
    uint8_t v;
    read_bytes(is, &v, 1, what);
    return v;
}

inline void write_f32(std::ostream& os, float v) {
    uint32_t u;
    std::memcpy(&u, &v, 4);
    write_u32(os, u);
}

inline float read_f32(std::istream& is, const char* what) {
    uint32_t u = read_u32(is, what);
    float v;
    std::memcpy(&v, &u, 4);
    return v;
}

inline void write_f32_array(std::ostream& os, const float* p, size_t n) {
    static_assert(sizeof(float) == 4);
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_LITTLE_ENDIAN__
    write_bytes(os, p, n * 4);
#else
    for (size_t i = 0; i < n; ++i) write_f32(os, p[i]);
#endif
}

inline void read_f32_array(std::istream& is, float* p, size_t n, const char* what) {
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_LITTLE_ENDIAN__
    read_bytes(is, p, n * 4, what);
#else
    for (size_t i = 0; i < n; ++i) p[i] = read_f32(is, what);
#endif
}

inline void write_magic(std::ostream& os, const char magic[5]) { write_bytes(os, magic, 4); }

inline void check_magic(std::istream& is, const char magic[5], const char* what) {
    char b[4];
    read_bytes(is, b, 4, what);
    if (std::memcmp(b, magic, 4) != 0)
        data_error(std::string("bad magic for ") + what + ": expected '" + magic + "'");
}

}  // namespace bvq::io
