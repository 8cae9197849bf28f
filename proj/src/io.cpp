#include "nirsim/io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>

namespace nirsim {
namespace io {

namespace {
static_assert(sizeof(double) == 8);

template <typename T>
void store_le(unsigned char* out, T v) {
    for (size_t i = 0; i < sizeof(T); ++i) out[i] = (v >> (8 * i)) & 0xFF;
}

template <typename T>
T load_le(const unsigned char* in) {
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) v |= T(in[i]) << (8 * i);
    return v;
}
}  // namespace

void write_bytes(std::ostream& os, const void* p, size_t n) {
    os.write(static_cast<const char*>(p), n);
    if (!os) throw IoError("write failed");
}

void read_bytes(std::istream& is, void* p, size_t n, const char* what) {
    is.read(static_cast<char*>(p), n);
    if (static_cast<size_t>(is.gcount()) != n)
        throw IoError(std::string("short read while reading ") + what);
}

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    store_le(b, v);
    write_bytes(os, b, 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    store_le(b, v);
    write_bytes(os, b, 8);
}

void write_i32(std::ostream& os, std::int32_t v) { write_u32(os, static_cast<std::uint32_t>(v)); }

void write_f64(std::ostream& os, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    write_u64(os, u);
}

void write_f64v(std::ostream& os, const std::vector<double>& v) {
    for (double x : v) write_f64(os, x);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    read_bytes(is, b, 4, "u32");
    return load_le<std::uint32_t>(b);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    read_bytes(is, b, 8, "u64");
    return load_le<std::uint64_t>(b);
}

std::int32_t read_i32(std::istream& is) { return static_cast<std::int32_t>(read_u32(is)); }

double read_f64(std::istream& is) {
    std::uint64_t u = read_u64(is);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

std::vector<double> read_f64v(std::istream& is, size_t n) {
    std::vector<double> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = read_f64(is);
    return v;
}

void write_magic(std::ostream& os, const char magic[5]) { write_bytes(os, magic, 5); }

void expect_magic(std::istream& is, const char magic[5], const std::string& path) {
    char b[5];
    read_bytes(is, b, 5, "magic");
    if (std::memcmp(b, magic, 5) != 0)
        throw IoError("bad magic in " + path + " (expected " +
                      std::string(magic, 5) + ")");
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace io
}  // namespace nirsim
