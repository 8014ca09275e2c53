#pragma once

#include <stdexcept>
#include <string>

namespace soilph {

// Broad failure class. The CLI maps these onto its exit codes.
enum class ErrorKind { usage, data, runtime };

// Every library failure carries a stable machine-readable code
// ("radius_range", "empty_dataset", "schema_mismatch", ...) next to the
// human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] void throw_usage(std::string code, const std::string& detail);
[[noreturn]] void throw_data(std::string code, const std::string& detail);
[[noreturn]] void throw_runtime(std::string code, const std::string& detail);

}  // namespace soilph
