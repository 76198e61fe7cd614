#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "hrbm/types.hpp"

namespace hrbm {

enum class ModelKind : std::uint8_t { hopfield = 0, rbm = 1, poe = 2 };

const char* to_string(ModelKind k);

// On-disk container for models and pattern matrices. The format is a
// self-describing binary header (kind, dims, named-matrix directory) followed
// by row-major little-endian IEEE doubles, so round trips are bit-exact.
struct ModelArchive {
  ModelKind kind = ModelKind::rbm;
  int n_visible = 0;
  int n_hidden = 0;
  double beta = 1.0;
  std::map<std::string, Matrix> matrices;          // by name: J, W, b, c, xi, ...
  std::map<std::string, std::string> metadata;     // creation parameters

  bool has(const std::string& name) const { return matrices.count(name) > 0; }
  const Matrix& matrix(const std::string& name) const;
};

bool bitwise_equal(const ModelArchive& a, const ModelArchive& b);

void save_model(const ModelArchive& archive, const std::filesystem::path& path);
ModelArchive load_model(const std::filesystem::path& path);

}  // namespace hrbm
