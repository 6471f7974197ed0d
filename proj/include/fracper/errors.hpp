#pragma once

#include <stdexcept>
#include <string>

namespace fracper {

/// Thrown when a documented hypothesis of an operation does not hold for the
/// given inputs. `hypothesis()` names the violated condition; the message
/// carries the concrete values.
class precondition_error : public std::domain_error {
  public:
    precondition_error(std::string hypothesis, const std::string& detail)
        : std::domain_error(hypothesis + ": " + detail), hypothesis_(std::move(hypothesis)) {}

    const std::string& hypothesis() const { return hypothesis_; }

  private:
    std::string hypothesis_;
};

} // namespace fracper
