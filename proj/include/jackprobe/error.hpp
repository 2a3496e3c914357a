#pragma once

#include <stdexcept>
#include <string>

namespace jackprobe {

/// Domain failure raised by every module. `what()` is a short summary suitable
/// for machine-readable reports; `detail()` carries free-form context.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message, std::string detail = {})
      : std::runtime_error(message), detail_(std::move(detail)) {}

  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
};

inline void require(bool condition, const std::string& message, const std::string& detail = {}) {
  if (!condition) throw Error(message, detail);
}

}  // namespace jackprobe
