#pragma once

#include <stdexcept>
#include <string>

namespace otp {

/// Allocation request above the configured element budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File missing, unreadable, truncated, or malformed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A power step produced a contraction with near-zero norm; the caller is
/// expected to restart the candidate.
class DegenerateUpdateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every restart of a component extraction failed.
class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace otp
