/**
 * @file io.hpp
 * @brief Little-endian binary primitives, CSV writing and FNV hashing shared
 *        by the file formats (NIRK1 kernel tables, NIRG1 ground states,
 *        NIRC1 chain checkpoints) and the experiment outputs.
 */

#ifndef NIRSIM_IO_HPP
#define NIRSIM_IO_HPP

#include <cstdint>
#include <cstring>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace nirsim {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace io {

void write_bytes(std::ostream& os, const void* p, size_t n);
void read_bytes(std::istream& is, void* p, size_t n, const char* what);

void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_i32(std::ostream& os, std::int32_t v);
void write_f64(std::ostream& os, double v);
void write_f64v(std::ostream& os, const std::vector<double>& v);

std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
std::int32_t read_i32(std::istream& is);
double read_f64(std::istream& is);
std::vector<double> read_f64v(std::istream& is, size_t n);

void write_magic(std::ostream& os, const char magic[5]);
void expect_magic(std::istream& is, const char magic[5], const std::string& path);

/// FNV-1a over a byte string; used for config hashes (stable across platforms).
std::uint64_t fnv1a(const std::string& s);

/// Formats a double with enough digits to round-trip exactly.
std::string fmt_full(double v);

}  // namespace io
}  // namespace nirsim

#endif
