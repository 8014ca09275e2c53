#include "soilph/error.hpp"

namespace soilph {

Error::Error(ErrorKind kind, std::string code, const std::string& detail)
    : std::runtime_error(code + ": " + detail), kind_(kind), code_(std::move(code)) {}

void throw_usage(std::string code, const std::string& detail) {
  throw Error(ErrorKind::usage, std::move(code), detail);
}

void throw_data(std::string code, const std::string& detail) {
  throw Error(ErrorKind::data, std::move(code), detail);
}

void throw_runtime(std::string code, const std::string& detail) {
  throw Error(ErrorKind::runtime, std::move(code), detail);
}

}  // namespace soilph
