#pragma once

#include <cstdint>
#include <string>

namespace memloom {

/// Reads a whole file into memory. Throws IoError when missing/unreadable.
std::string read_file(const std::string& path);

/// Writes via a temp file in the same directory followed by rename, so
/// readers never observe a half-written file.
void write_file_atomic(const std::string& path, const std::string& content);

/// Shortest decimal form of a non-negative time value: 4 -> "4", 0.5 -> "0.5".
std::string format_seconds(double seconds);

/// SplitMix64 step; used for seeding and hash-derived mock embeddings.
uint64_t splitmix64(uint64_t& state);

/// FNV-1a 64-bit hash of a byte string.
uint64_t fnv1a64(const std::string& text);

}  // namespace memloom
