#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <stdexcept>
#include <string>

namespace eqlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Thrown when a caller breaks an operation's precondition (dimension
// mismatch, invalid policy, off-turn query, ...).
struct ContractViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown on malformed configs or unparseable input files.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an enumeration exceeds its node budget.
struct BudgetExceeded : std::runtime_error {
  BudgetExceeded(const std::string& what, long long n)
      : std::runtime_error(what), count(n) {}
  long long count;
};

#define EQLAB_CHECK(cond, msg)                            \
  do {                                                    \
    if (!(cond)) throw ::eqlab::ContractViolation(msg);   \
  } while (0)

// Shortest round-trip decimal form; keeps emitted CSV/JSON byte-stable.
inline std::string fmt_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace eqlab
