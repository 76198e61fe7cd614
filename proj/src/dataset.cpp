#include "hrbm/dataset.hpp"

#include <fstream>

#include "hrbm/errors.hpp"

namespace hrbm {

namespace {

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

}  // namespace

IdxTensor parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Truncated("idx: fewer than 4 header bytes");
  IdxTensor t;
  t.magic = read_be32(bytes.data());
  std::size_t rank = 0;
  if (t.magic == kIdxMagicImages) {
    rank = 3;
  } else if (t.magic == kIdxMagicLabels) {
    rank = 1;
  } else {
    throw BadMagic("idx: unknown magic 0x" + [m = t.magic] {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%08x", m);
      return std::string(buf);
    }());
  }
  const std::size_t header = 4 + 4 * rank;
  if (bytes.size() < header) throw Truncated("idx: header shorter than declared rank");
  t.dims.resize(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    t.dims[d] = read_be32(bytes.data() + 4 + 4 * d);
  }
  const std::size_t payload = t.size();
  if (bytes.size() < header + payload) {
    throw Truncated("idx: payload shorter than the header promises");
  }
  t.data.assign(bytes.begin() + header, bytes.begin() + header + payload);
  return t;
}

IdxTensor read_idx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_idx(bytes);
}

Matrix binarize(const IdxTensor& images) {
  if (images.dims.size() != 3) {
    throw SchemaMismatch("binarize expects a rank-3 image tensor");
  }
  const int count = static_cast<int>(images.dims[0]);
  const int n = static_cast<int>(images.dims[1] * images.dims[2]);
  Matrix out(n, count);
  for (int a = 0; a < count; ++a) {
    const std::uint8_t* px = images.data.data() + std::size_t(a) * n;
    for (int i = 0; i < n; ++i) out(i, a) = px[i] > 0 ? 1.0 : -1.0;
  }
  return out;
}

namespace {

std::vector<std::vector<int>> build_class_index(const std::vector<int>& labels) {
  int n_classes = 0;
  for (int l : labels) n_classes = std::max(n_classes, l + 1);
  std::vector<std::vector<int>> index(static_cast<std::size_t>(n_classes));
  for (int a = 0; a < static_cast<int>(labels.size()); ++a) {
    index[static_cast<std::size_t>(labels[a])].push_back(a);
  }
  return index;
}

}  // namespace

BinaryDataset make_dataset(const IdxTensor& images, const IdxTensor& labels) {
  if (labels.dims.size() != 1) throw SchemaMismatch("labels must be rank 1");
  if (images.dims.at(0) != labels.dims.at(0)) {
    throw SchemaMismatch("image and label counts differ");
  }
  BinaryDataset ds;
  ds.samples = binarize(images);
  ds.labels.assign(labels.data.begin(), labels.data.end());
  ds.class_index = build_class_index(ds.labels);
  return ds;
}

BinaryDataset load_mnist(const std::filesystem::path& dir, bool train) {
  const char* img = train ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte";
  const char* lab = train ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte";
  return make_dataset(read_idx(dir / img), read_idx(dir / lab));
}

BinaryDataset head_subset(const BinaryDataset& ds, int count) {
  if (count <= 0 || count >= ds.count()) return ds;
  BinaryDataset out;
  out.samples = ds.samples.leftCols(count);
  out.labels.assign(ds.labels.begin(), ds.labels.begin() + count);
  out.class_index = build_class_index(out.labels);
  return out;
}

BinaryDataset select(const BinaryDataset& ds, const std::vector<int>& indices) {
  BinaryDataset out;
  out.samples.resize(ds.samples.rows(), static_cast<int>(indices.size()));
  out.labels.resize(indices.size());
  for (int j = 0; j < static_cast<int>(indices.size()); ++j) {
    out.samples.col(j) = ds.samples.col(indices[static_cast<std::size_t>(j)]);
    out.labels[static_cast<std::size_t>(j)] = ds.labels[static_cast<std::size_t>(indices[static_cast<std::size_t>(j)])];
  }
  out.class_index = build_class_index(out.labels);
  return out;
}

}  // namespace hrbm
