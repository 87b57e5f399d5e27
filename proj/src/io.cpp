#include "annomap/io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "annomap/errors.hpp"
#include "annomap/version.hpp"

namespace annomap {

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  return fnv1a64(read_file(path));
}

std::string to_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw IoError("failed to format double");
  return std::string(buf, ptr);
}

void MetaHeader::add_input_digest(const std::string& name, const std::filesystem::path& path) {
  add("input " + name, "fnv1a64:" + to_hex(fnv1a64_file(path)));
}

void write_meta(std::ostream& out, const MetaHeader& meta) {
  out << "# tool: " << kToolName << ' ' << kToolVersion << '\n';
  for (const auto& [key, value] : meta.fields) {
    out << "# " << key << ": " << value << '\n';
  }
}

bool is_skippable_line(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;  // blank
}

std::vector<std::pair<std::string, std::string>> read_meta(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> fields;
  std::string line;
  while (true) {
    auto pos = in.tellg();
    if (!std::getline(in, line)) break;
    if (!is_skippable_line(line)) {
      in.seekg(pos);
      break;
    }
    auto hash = line.find('#');
    if (hash == std::string::npos) continue;
    auto colon = line.find(':', hash);
    if (colon == std::string::npos) continue;
    std::string key = line.substr(hash + 1, colon - hash - 1);
    std::string value = line.substr(colon + 1);
    auto trim = [](std::string& s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
    };
    trim(key);
    trim(value);
    fields.emplace_back(std::move(key), std::move(value));
  }
  return fields;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace annomap
