#include "gihelm/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <json.hpp>

#include "gihelm/binary.hpp"

namespace gihelm {

std::string git_blob_sha1(std::string_view bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    const unsigned char c = md[i];
    out += hex[c >> 4];
    out += hex[c & 15];
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ManifestFile describe_file(const std::filesystem::path& file, const std::filesystem::path& relative_to) {
  const std::string bytes = binary::read_file(file);
  std::filesystem::path rel = relative_to.empty() ? file : std::filesystem::proximate(file, relative_to);
  return {rel.generic_string(), git_blob_sha1(bytes), bytes.size()};
}

void set_inputs(RunManifest& manifest, const std::vector<std::filesystem::path>& files,
                const std::filesystem::path& relative_to) {
  manifest.inputs.clear();
  for (const auto& f : files) manifest.inputs.push_back(describe_file(f, relative_to));
  std::vector<std::string> lines;
  for (const auto& f : manifest.inputs) lines.push_back(f.sha1 + " " + f.path + "\n");
  std::sort(lines.begin(), lines.end());
  std::string joined;
  for (const auto& l : lines) joined += l;
  manifest.input_hash = git_blob_sha1(joined);
}

std::string manifest_json(const RunManifest& m) {
  auto files = [](const std::vector<ManifestFile>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& f : v) a.push_back({{"path", f.path}, {"sha1", f.sha1}, {"bytes", f.bytes}});
    return a;
  };
  nlohmann::json j;
  j["command"] = m.command;
  j["seed"] = m.seed;
  nlohmann::json cfg = nlohmann::json::parse(m.config_text, nullptr, false);
  j["config"] = cfg.is_discarded() ? nlohmann::json(m.config_text) : cfg;
  j["inputs"] = files(m.inputs);
  j["input_hash"] = m.input_hash;
  j["started_utc"] = m.started_utc;
  j["finished_utc"] = m.finished_utc;
  j["outputs"] = files(m.outputs);
  return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  binary::write_file(path, manifest_json(manifest));
}

}  // namespace gihelm
