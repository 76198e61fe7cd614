#include "hrbm/archive.hpp"

#include <cstring>
#include <fstream>

#include "hrbm/errors.hpp"

namespace hrbm {

namespace {

constexpr char kMagic[8] = {'H', 'R', 'B', 'M', 'A', 'R', 'C', '1'};
constexpr std::uint32_t kVersion = 1;

// The format is explicitly little-endian; this implementation assumes an
// LE host (checked once at write time).
bool host_is_little_endian() {
  const std::uint32_t probe = 1;
  std::uint8_t first;
  std::memcpy(&first, &probe, 1);
  return first == 1;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}
void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}
void put_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}
void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw SchemaMismatch("archive: truncated header");
  return v;
}
std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  if (!in) throw SchemaMismatch("archive: truncated header");
  return v;
}
double get_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  if (!in) throw SchemaMismatch("archive: truncated header");
  return v;
}
std::string get_string(std::istream& in) {
  const std::uint32_t len = get_u32(in);
  if (len > (1u << 20)) throw SchemaMismatch("archive: implausible string length");
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw SchemaMismatch("archive: truncated string");
  return s;
}

void validate_shapes(const ModelArchive& a) {
  const int n = a.n_visible;
  const int p = a.n_hidden;
  auto expect = [&](const std::string& name, int rows, int cols) {
    auto it = a.matrices.find(name);
    if (it == a.matrices.end()) return;
    if (it->second.rows() != rows || it->second.cols() != cols) {
      throw SchemaMismatch("archive: matrix " + name + " does not match declared dims");
    }
  };
  expect("J", n, n);
  expect("W", n, p);
  expect("xi", n, p);
  expect("b", n, 1);
  expect("c", p, 1);
}

}  // namespace

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::hopfield: return "hopfield";
    case ModelKind::rbm: return "rbm";
    case ModelKind::poe: return "poe";
  }
  return "?";
}

const Matrix& ModelArchive::matrix(const std::string& name) const {
  auto it = matrices.find(name);
  if (it == matrices.end()) throw SchemaMismatch("archive: missing matrix " + name);
  return it->second;
}

bool bitwise_equal(const ModelArchive& a, const ModelArchive& b) {
  if (a.kind != b.kind || a.n_visible != b.n_visible || a.n_hidden != b.n_hidden)
    return false;
  if (std::memcmp(&a.beta, &b.beta, sizeof(double)) != 0) return false;
  if (a.metadata != b.metadata) return false;
  if (a.matrices.size() != b.matrices.size()) return false;
  for (const auto& [name, m] : a.matrices) {
    auto it = b.matrices.find(name);
    if (it == b.matrices.end()) return false;
    const Matrix& o = it->second;
    if (m.rows() != o.rows() || m.cols() != o.cols()) return false;
    if (m.size() > 0 &&
        std::memcmp(m.data(), o.data(), sizeof(double) * static_cast<std::size_t>(m.size())) != 0)
      return false;
  }
  return true;
}

void save_model(const ModelArchive& archive, const std::filesystem::path& path) {
  if (!host_is_little_endian()) throw IoError("archive format requires an LE host");
  validate_shapes(archive);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");

  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(archive.kind));
  put_u32(out, static_cast<std::uint32_t>(archive.n_visible));
  put_u32(out, static_cast<std::uint32_t>(archive.n_hidden));
  put_f64(out, archive.beta);

  put_u32(out, static_cast<std::uint32_t>(archive.metadata.size()));
  for (const auto& [k, v] : archive.metadata) {
    put_string(out, k);
    put_string(out, v);
  }

  put_u32(out, static_cast<std::uint32_t>(archive.matrices.size()));
  for (const auto& [name, m] : archive.matrices) {
    put_string(out, name);
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
  }
  // Row-major payload in directory order.
  for (const auto& [name, m] : archive.matrices) {
    (void)name;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

ModelArchive load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw SchemaMismatch("archive: bad magic in " + path.string());
  }
  if (get_u32(in) != kVersion) throw SchemaMismatch("archive: unsupported version");

  ModelArchive a;
  const std::uint32_t kind = get_u32(in);
  if (kind > 2) throw SchemaMismatch("archive: unknown kind");
  a.kind = static_cast<ModelKind>(kind);
  a.n_visible = static_cast<int>(get_u32(in));
  a.n_hidden = static_cast<int>(get_u32(in));
  a.beta = get_f64(in);

  const std::uint32_t n_meta = get_u32(in);
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = get_string(in);
    a.metadata[k] = get_string(in);
  }

  const std::uint32_t n_mats = get_u32(in);
  std::vector<std::pair<std::string, std::pair<std::uint64_t, std::uint64_t>>> dir;
  for (std::uint32_t i = 0; i < n_mats; ++i) {
    std::string name = get_string(in);
    const std::uint64_t rows = get_u64(in);
    const std::uint64_t cols = get_u64(in);
    if (rows > (1u << 24) || cols > (1u << 24)) {
      throw SchemaMismatch("archive: implausible matrix shape");
    }
    dir.emplace_back(std::move(name), std::make_pair(rows, cols));
  }
  for (const auto& [name, shape] : dir) {
    Matrix m(static_cast<Eigen::Index>(shape.first), static_cast<Eigen::Index>(shape.second));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get_f64(in);
    }
    a.matrices.emplace(name, std::move(m));
  }
  validate_shapes(a);
  return a;
}

}  // namespace hrbm
