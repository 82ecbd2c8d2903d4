// SPDX-License-Identifier: Apache-2.0

#include "relhal/error.hpp"

namespace relhal {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace relhal
