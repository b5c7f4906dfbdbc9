#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace otadpd {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

// Complex baseband samples in volts, tagged with their rate in Hz.
struct ComplexSignal {
    CVec samples;
    double sample_rate = 0.0;

    std::size_t size() const { return samples.size(); }
    cplx& operator[](std::size_t i) { return samples[i]; }
    const cplx& operator[](std::size_t i) const { return samples[i]; }
};

using MessageSequence = std::vector<int>;

// Row n holds the probability vector of symbol n (N rows, M columns, row-major).
struct ProbabilityMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    RVec p;

    double& at(std::size_t n, std::size_t i) { return p[n * cols + i]; }
    double at(std::size_t n, std::size_t i) const { return p[n * cols + i]; }
};

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
    NumericError(const std::string& what, std::size_t idx)
        : std::runtime_error(what + " (index " + std::to_string(idx) + ")"), index(idx) {}
    std::size_t index;
};

struct IllConditionedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& field_name, const std::string& what)
        : std::runtime_error(field_name + ": " + what), field(field_name) {}
    std::string field;
};

void require_finite(const ComplexSignal& x, const char* what);

}  // namespace otadpd
