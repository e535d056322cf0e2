#pragma once

#include <Eigen/Dense>
#include <istream>
#include <string>
#include <vector>

#include "commutree/errors.hpp"

namespace commutree::text {

/// Whitespace-tokenized line reader with line numbers for error messages.
class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  /// Next non-empty line split into tokens; false at end of input.
  bool next(std::vector<std::string>& tokens);
  /// Like next() but throws FormatError at end of input.
  std::vector<std::string> expect(const std::string& what);
  /// Expects a line starting with keyword and returns the remaining tokens.
  std::vector<std::string> expect_keyword(const std::string& keyword, std::size_t min_args = 0);

  int line() const { return line_; }
  [[noreturn]] void fail(const std::string& what) const { throw FormatError(line_, what); }

  double to_double(const std::string& tok) const;
  long long to_int(const std::string& tok) const;
  Eigen::VectorXd to_vector(const std::vector<std::string>& toks, std::size_t first,
                            std::size_t count) const;

 private:
  std::istream& is_;
  int line_ = 0;
};

std::string join_hex(const Eigen::VectorXd& v);

}  // namespace commutree::text
