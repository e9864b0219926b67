#pragma once

#include <stdexcept>
#include <string>

namespace hm {

enum class ErrorKind {
    dimension,
    incompatible_window,
    unsupported_dimension,
    non_integrable_model,
    quadrature_failure,
    zero_wavevector,
    empty_core,
    cardinality_mismatch,
    empty_input,
    non_convergence,
    unsupported_case,
    non_modulus_cost,
    insufficient_tail_data,
    config,
    numerical_guard,
    io,
};

const char* kind_name(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace hm
