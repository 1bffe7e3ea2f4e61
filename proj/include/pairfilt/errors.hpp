// errors.hpp — exception hierarchy for invalid inputs and numerical failure modes

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pairfilt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid physical parameter (non-positive width, angle out of range, ...).
struct DomainError : Error {
    using Error::Error;
};

// Grid too coarse to resolve the narrowest spectral feature.
struct ResolutionError : Error {
    using Error::Error;
};

// Filter passband lies entirely outside the sampled grid.
struct CoverageError : Error {
    using Error::Error;
};

// All-zero filtered amplitude or otherwise degenerate numerical input.
struct DegenerateInputError : Error {
    using Error::Error;
};

// Gaussian-model coefficients do not describe a normalizable spectrum.
struct InvalidGaussianError : Error {
    using Error::Error;
};

// Scenario file violates the schema; carries one message per offending field.
struct SchemaError : Error {
    explicit SchemaError(std::vector<std::string> field_errors)
        : Error(join(field_errors))
        , fields(std::move(field_errors))
    {
    }

    std::vector<std::string> fields;

private:
    static std::string join(const std::vector<std::string>& items)
    {
        std::string out = "scenario schema violation:";
        for (const auto& item : items) {
            out += "\n  - " + item;
        }
        return out;
    }
};

} // namespace pairfilt
