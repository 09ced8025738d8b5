#include "manifest.hpp"

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "rtetr/error.hpp"

namespace rtetr::experiment {

std::string git_blob_hash_bytes(const std::string& bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1)
    throw std::runtime_error("SHA-1 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string git_blob_hash(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return git_blob_hash_bytes(ss.str());
}

Manifest::Manifest(std::string command, std::filesystem::path out_dir)
    : command_(std::move(command)), dir_(std::move(out_dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path Manifest::output(const std::string& name) {
  const auto path = dir_ / name;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  outputs_.push_back(path);
  return path;
}

void Manifest::add_input(const std::filesystem::path& path) { inputs_.push_back(path); }

std::filesystem::path Manifest::write(int exit_code) {
  const auto path = output("manifest.json");
  nlohmann::json j;
  j["command"] = command_;
  j["exit_code"] = exit_code;
  j["config"] = config_;
  j["inputs"] = nlohmann::json::array();
  for (const auto& in : inputs_)
    j["inputs"].push_back({{"path", in.string()}, {"sha1", git_blob_hash(in)}});
  j["outputs"] = nlohmann::json::array();
  for (const auto& out : outputs_) j["outputs"].push_back(out.lexically_relative(dir_).string());
  for (const auto& [k, v] : extra_.items()) j[k] = v;
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot write " + path.string());
  os << j.dump(2) << '\n';
  return path;
}

}  // namespace rtetr::experiment
