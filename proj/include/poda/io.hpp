#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace poda {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

/// Writes to `<path>.tmp` and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Non-empty lines of a file, without trailing CR.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// UTC ISO-8601 timestamp; honours SOURCE_DATE_EPOCH when set.
std::string timestamp_utc();

struct FileDigest {
  std::string path;
  std::string sha256;
};

/// Everything needed to re-run a command and check what it consumed and made.
struct RunManifest {
  std::string tool_version;
  std::string command;
  std::string created_at;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::string config_json;  // command-specific object, already serialized
  std::vector<std::string> warnings;

  std::string to_json() const;
};

}  // namespace poda
