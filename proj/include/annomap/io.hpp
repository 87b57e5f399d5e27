#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace annomap {

// FNV-1a, 64 bit. Fixed hash for feature buckets and file content digests.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xCBF29CE484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string to_hex(std::uint64_t value);

// Shortest round-trip decimal form, locale independent.
std::string format_double(double value);

// Metadata header written at the top of every output file as '#'-prefixed
// lines: tool version, resolved configuration, input content digests.
struct MetaHeader {
  std::vector<std::pair<std::string, std::string>> fields;

  void add(std::string key, std::string value) {
    fields.emplace_back(std::move(key), std::move(value));
  }
  void add_input_digest(const std::string& name, const std::filesystem::path& path);
};

void write_meta(std::ostream& out, const MetaHeader& meta);

// True for blank lines and '#' metadata/comment lines, which every reader skips.
bool is_skippable_line(std::string_view line);

// Reads the '# key: value' header of a serialized file. Stops at the first
// non-meta line (which is pushed back for the caller via the returned offset).
std::vector<std::pair<std::string, std::string>> read_meta(std::istream& in);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace annomap
