#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace hrbm {

// Deterministic text form of a double (%.17g round-trips the bit pattern).
std::string format_double(double v);

// CSV writer with the fixed header `epoch,run,metric,value`.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path);
  void write(int epoch, int run, std::string_view metric, double value);
  void flush();

 private:
  std::ofstream out_;
};

std::uint64_t fnv1a64_file(const std::filesystem::path& path);

// manifest.json listing emitted files with content hashes and a completion flag.
void write_manifest(const std::filesystem::path& out_path,
                    const std::filesystem::path& base_dir,
                    const std::vector<std::filesystem::path>& files,
                    bool complete);

}  // namespace hrbm
