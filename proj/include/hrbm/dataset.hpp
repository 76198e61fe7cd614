#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hrbm/types.hpp"

namespace hrbm {

// Raw tensor from an IDX container file (big-endian magic + dims, uint8 payload).
struct IdxTensor {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;

  std::size_t size() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }
  std::uint8_t at(std::size_t flat) const { return data[flat]; }
};

constexpr std::uint32_t kIdxMagicImages = 0x00000803;  // rank-3 uint8
constexpr std::uint32_t kIdxMagicLabels = 0x00000801;  // rank-1 uint8

IdxTensor parse_idx(std::span<const std::uint8_t> bytes);
IdxTensor read_idx(const std::filesystem::path& path);

// Labeled +-1 dataset. Samples are stored as columns for cheap linear algebra.
struct BinaryDataset {
  Matrix samples;                            // n_visible x count, entries in {-1,+1}
  std::vector<int> labels;                   // length count
  std::vector<std::vector<int>> class_index; // class -> sample indices

  int n_visible() const { return static_cast<int>(samples.rows()); }
  int count() const { return static_cast<int>(samples.cols()); }
  int n_classes() const { return static_cast<int>(class_index.size()); }
};

// Flatten a rank-3 uint8 image tensor to +-1 columns: value > 0 maps to +1,
// zero maps to -1.
Matrix binarize(const IdxTensor& images);

BinaryDataset make_dataset(const IdxTensor& images, const IdxTensor& labels);

// Reads {train,t10k}-{images-idx3,labels-idx1}-ubyte from a directory.
BinaryDataset load_mnist(const std::filesystem::path& dir, bool train);

// First `count` samples, class index rebuilt.
BinaryDataset head_subset(const BinaryDataset& ds, int count);

BinaryDataset select(const BinaryDataset& ds, const std::vector<int>& indices);

}  // namespace hrbm
