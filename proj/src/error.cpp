#include "hypermatch/error.hpp"

namespace hm {

const char* kind_name(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::dimension: return "dimension-error";
    case ErrorKind::incompatible_window: return "incompatible-window";
    case ErrorKind::unsupported_dimension: return "unsupported-dimension";
    case ErrorKind::non_integrable_model: return "non-integrable-model";
    case ErrorKind::quadrature_failure: return "quadrature-failure";
    case ErrorKind::zero_wavevector: return "zero-wavevector";
    case ErrorKind::empty_core: return "empty-core";
    case ErrorKind::cardinality_mismatch: return "cardinality-mismatch";
    case ErrorKind::empty_input: return "empty-input";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::unsupported_case: return "unsupported-case";
    case ErrorKind::non_modulus_cost: return "non-modulus-cost";
    case ErrorKind::insufficient_tail_data: return "insufficient-tail-data";
    case ErrorKind::config: return "config-error";
    case ErrorKind::numerical_guard: return "numerical-guard";
    case ErrorKind::io: return "io-error";
    }
    return "error";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace hm
