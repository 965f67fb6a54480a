#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace monreco {

// Base class for every fault raised by the library. `code()` is the stable
// machine-readable name the CLI prints; what() carries the detail.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define MONRECO_ERROR_TYPE(NAME)                                            \
    class NAME : public Error {                                             \
    public:                                                                 \
        explicit NAME(const std::string& message) : Error(#NAME, message) {} \
    }

MONRECO_ERROR_TYPE(ParseError);
MONRECO_ERROR_TYPE(SchemaVersionError);
MONRECO_ERROR_TYPE(ValidationError);
MONRECO_ERROR_TYPE(LengthMismatch);
MONRECO_ERROR_TYPE(DimensionMismatch);
MONRECO_ERROR_TYPE(DomainError);
MONRECO_ERROR_TYPE(DegenerateExpected);
MONRECO_ERROR_TYPE(SingleClassError);
MONRECO_ERROR_TYPE(NoPositiveLabels);
MONRECO_ERROR_TYPE(UnknownService);
MONRECO_ERROR_TYPE(UnknownNeighbor);
MONRECO_ERROR_TYPE(EmptyTestSet);
MONRECO_ERROR_TYPE(ClassAbsentFromTraining);
MONRECO_ERROR_TYPE(DivergenceError);
MONRECO_ERROR_TYPE(ConvergenceError);
MONRECO_ERROR_TYPE(ConfigError);
MONRECO_ERROR_TYPE(ModelNotFound);
MONRECO_ERROR_TYPE(IoError);

#undef MONRECO_ERROR_TYPE

} // namespace monreco
