#ifndef BESMP_ERRORS_HPP
#define BESMP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace besmp {

// Posterior update with sigma_x^2 + sigma_n^2 = 0 has no defined conditional.
struct DegeneratePosteriorError : std::runtime_error {
    explicit DegeneratePosteriorError(const std::string& msg) : std::runtime_error(msg) {}
};

// Noiseless observations need the noiseless reduction, not the g-statistic.
struct DegenerateNoiseError : std::runtime_error {
    explicit DegenerateNoiseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Threshold vectors must be strictly ascending; a zero tolerance collapses them.
struct DegenerateVectorError : std::invalid_argument {
    explicit DegenerateVectorError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct FitFailureError : std::runtime_error {
    explicit FitFailureError(const std::string& msg) : std::runtime_error(msg) {}
};

struct OptimizerFailureError : std::runtime_error {
    explicit OptimizerFailureError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace besmp

#endif
