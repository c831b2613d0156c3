#ifndef FHARTREE_COMMON_HPP
#define FHARTREE_COMMON_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace fhartree {

using cplx = std::complex<double>;

constexpr double pi = 3.141592653589793238462643383279502884;

/// Thrown on contract violations (grid mismatch, bad parameters, aliasing guards).
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a computation detects a numerical failure (blow-up, divergence,
/// non-convergence) rather than a bad argument.
class numerical_failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
[[noreturn]] inline void fail_requirement(const std::string& what) {
  throw invalid_input(what);
}
}  // namespace detail

#define FH_REQUIRE(cond, msg)                  \
  do {                                         \
    if (!(cond)) ::fhartree::detail::fail_requirement(msg); \
  } while (0)

}  // namespace fhartree

#endif
