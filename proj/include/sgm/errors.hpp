#ifndef SGM_ERRORS_HPP
#define SGM_ERRORS_HPP

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sgm {

/// Operand shapes do not agree (vector length vs matrix order, etc.).
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {
inline std::string fmt_g(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}
} // namespace detail

/// An iterative method hit its iteration budget.
class NonConvergence : public std::runtime_error {
public:
  NonConvergence(const std::string& what, std::size_t iterations, double residual)
      : std::runtime_error(what + " (iterations=" + std::to_string(iterations) +
                           ", residual=" + detail::fmt_g(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  std::size_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

private:
  std::size_t iterations_;
  double residual_;
};

/// A matrix or pencil expected to be positive definite is not.
class IndefiniteError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Text input could not be parsed.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace sgm

#endif // SGM_ERRORS_HPP
