#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phimdp {

/// Malformed input file. line() is 1-based, 0 when the whole file is at fault.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace phimdp
