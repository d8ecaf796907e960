#include "fput/errors.hpp"

#include <utility>

namespace fput {

Error::Error(std::string kind, const std::string& message)
    : std::runtime_error(message), kind_(std::move(kind)) {}

}  // namespace fput
