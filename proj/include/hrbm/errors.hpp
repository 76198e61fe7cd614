#pragma once

#include <stdexcept>
#include <string>

namespace hrbm {

// Base error carrying a stable machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct BadMagic : Error {
  explicit BadMagic(const std::string& w) : Error("BadMagic", w) {}
};
struct Truncated : Error {
  explicit Truncated(const std::string& w) : Error("Truncated", w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error("IoError", w) {}
};
struct SchemaMismatch : Error {
  explicit SchemaMismatch(const std::string& w) : Error("SchemaMismatch", w) {}
};
struct EmptyClass : Error {
  explicit EmptyClass(const std::string& w) : Error("EmptyClass", w) {}
};
struct TooFewSamples : Error {
  explicit TooFewSamples(const std::string& w) : Error("TooFewSamples", w) {}
};
struct RankDeficient : Error {
  explicit RankDeficient(const std::string& w) : Error("RankDeficient", w) {}
};
struct NotOrthogonal : Error {
  explicit NotOrthogonal(const std::string& w) : Error("NotOrthogonal", w) {}
};
struct TooLarge : Error {
  explicit TooLarge(const std::string& w) : Error("TooLarge", w) {}
};
struct DegenerateSchedule : Error {
  explicit DegenerateSchedule(const std::string& w) : Error("DegenerateSchedule", w) {}
};
struct ShapeUnknown : Error {
  explicit ShapeUnknown(const std::string& w) : Error("ShapeUnknown", w) {}
};
struct NonConvergence : Error {
  explicit NonConvergence(const std::string& w) : Error("NonConvergence", w) {}
};

}  // namespace hrbm
