#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fwnav {

// Raised when an operation receives an input outside its contract. `field`
// names the offending quantity (e.g. "wrench.force", "state.rotation").
class Fault : public std::runtime_error {
public:
    Fault(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace fwnav
