#pragma once

#include <string>

#include "symlie/family.hpp"
#include "symlie/parse.hpp"

namespace symlie::testing {

inline std::string fixture_path(const std::string& relative) {
  return std::string(SYMLIE_FIXTURE_DIR) + "/" + relative;
}

inline std::string fixture_text(const std::string& relative) {
  return read_text_file(fixture_path(relative));
}

inline VectorField fixture_field(const std::string& relative) {
  return parse_vector_field(fixture_text(relative));
}

inline PointTransform fixture_transform(const std::string& relative) {
  return PointTransform::parse(fixture_text(relative));
}

}  // namespace symlie::testing
