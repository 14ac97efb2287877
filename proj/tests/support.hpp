#pragma once

#include <string>

#include "exr/common.hpp"

namespace exr::test {

inline std::string source_path(const std::string& rel) {
  return std::string(EXR_SOURCE_DIR) + "/" + rel;
}

inline std::string data(const std::string& rel) { return read_file(source_path("data/" + rel)); }

inline std::string corpus(const std::string& name) { return data("corpus/" + name); }

}  // namespace exr::test
