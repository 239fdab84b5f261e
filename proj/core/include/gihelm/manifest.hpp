#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gihelm {

/// SHA-1 of "blob <size>\0" + bytes, as lowercase hex (git object id).
std::string git_blob_sha1(std::string_view bytes);

struct ManifestFile {
  std::string path;  // relative to the manifest's directory
  std::string sha1;
  std::uint64_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::string config_text;
  std::uint64_t seed = 0;
  std::vector<ManifestFile> inputs;
  /// Object id over the sorted "path sha1" input lines.
  std::string input_hash;
  std::string started_utc;
  std::string finished_utc;
  std::vector<ManifestFile> outputs;
};

std::string utc_timestamp();

ManifestFile describe_file(const std::filesystem::path& file, const std::filesystem::path& relative_to);

/// Fills inputs and input_hash from the given files.
void set_inputs(RunManifest& manifest, const std::vector<std::filesystem::path>& files,
                const std::filesystem::path& relative_to);

std::string manifest_json(const RunManifest& manifest);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace gihelm
