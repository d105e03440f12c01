#pragma once

#include <string_view>

#include "xlb/source_model.hpp"

namespace xlb::detail {

SourceUnit parse_python(std::string_view path, std::string_view source);
SourceUnit parse_java(std::string_view path, std::string_view source);

}  // namespace xlb::detail
