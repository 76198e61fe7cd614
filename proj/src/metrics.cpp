#include "hrbm/metrics.hpp"

#include <cstdio>

#include "hrbm/errors.hpp"

#include <nlohmann/json.hpp>

namespace hrbm {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path) : out_(path) {
  if (!out_) throw IoError("cannot open metrics file " + path.string());
  out_ << "epoch,run,metric,value\n";
}

void MetricsWriter::write(int epoch, int run, std::string_view metric, double value) {
  out_ << epoch << ',' << run << ',' << metric << ',' << format_double(value) << '\n';
}

void MetricsWriter::flush() { out_.flush(); }

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot hash " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<std::uint8_t>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  return h;
}

void write_manifest(const std::filesystem::path& out_path,
                    const std::filesystem::path& base_dir,
                    const std::vector<std::filesystem::path>& files,
                    bool complete) {
  nlohmann::ordered_json j;
  j["complete"] = complete;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64_file(f)));
    arr.push_back({{"file", std::filesystem::relative(f, base_dir).generic_string()},
                   {"bytes", std::filesystem::file_size(f)},
                   {"fnv1a64", hex}});
  }
  j["files"] = arr;
  std::ofstream out(out_path);
  if (!out) throw IoError("cannot write manifest " + out_path.string());
  out << j.dump(2) << '\n';
}

}  // namespace hrbm
