#pragma once

#include <stdexcept>
#include <string>

namespace flagmult {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define FLAGMULT_ERROR(Name)                          \
    struct Name : Error {                             \
        explicit Name(const std::string& what)        \
            : Error(std::string(#Name ": ") + what) {} \
    }

FLAGMULT_ERROR(InvalidInput);
FLAGMULT_ERROR(ConstructionFailure);
FLAGMULT_ERROR(SymbolError);
FLAGMULT_ERROR(ScaleError);
FLAGMULT_ERROR(OracleTooLarge);
FLAGMULT_ERROR(PlanError);
FLAGMULT_ERROR(FamilyError);
FLAGMULT_ERROR(DegenerateInput);
FLAGMULT_ERROR(InvalidExponent);
FLAGMULT_ERROR(HolderError);

#undef FLAGMULT_ERROR

struct DecompositionError : Error {
    double residual;
    DecompositionError(const std::string& what, double r)
        : Error("DecompositionError: " + what), residual(r) {}
};

struct ConfigError : Error {
    int line, column;
    ConfigError(const std::string& what, int l, int c)
        : Error("ConfigError at " + std::to_string(l) + ":" + std::to_string(c) + ": " + what),
          line(l), column(c) {}
};

}  // namespace flagmult
