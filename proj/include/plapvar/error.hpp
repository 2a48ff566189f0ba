#pragma once

#include <stdexcept>
#include <string>

namespace plapvar {

/// Failure raised by any toolkit operation. The message is prefixed with
/// the module and operation that produced it ("eigen::first_eigenpair: ...").
class Error : public std::runtime_error {
public:
    Error(std::string module, std::string operation, const std::string &message)
        : std::runtime_error(module + "::" + operation + ": " + message),
          module_(std::move(module)),
          operation_(std::move(operation)) {}

    const std::string &module() const noexcept { return module_; }
    const std::string &operation() const noexcept { return operation_; }

private:
    std::string module_;
    std::string operation_;
};

}  // namespace plapvar
