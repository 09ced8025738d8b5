#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace rtetr::experiment {

/// SHA-1 of "blob <size>\0<contents>", as computed by `git hash-object`.
std::string git_blob_hash(const std::filesystem::path& path);
std::string git_blob_hash_bytes(const std::string& bytes);

/// Collects every file a run writes and serializes the run record.
class Manifest {
 public:
  Manifest(std::string command, std::filesystem::path out_dir);

  /// Registers `name` under the output directory and returns its full path.
  std::filesystem::path output(const std::string& name);
  void add_input(const std::filesystem::path& path);
  void set_config(nlohmann::json resolved) { config_ = std::move(resolved); }
  nlohmann::json& extra() { return extra_; }
  const std::vector<std::filesystem::path>& outputs() const { return outputs_; }

  /// Writes manifest.json (listing itself as an output).
  std::filesystem::path write(int exit_code);

 private:
  std::string command_;
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> outputs_;
  std::vector<std::filesystem::path> inputs_;
  nlohmann::json config_;
  nlohmann::json extra_ = nlohmann::json::object();
};

}  // namespace rtetr::experiment
