#pragma once

// Right-hand sides of the Fourier transport bounds, the rate functions and
// the tail predictor. Unspecified universal constants are set to 1.

#include <span>
#include <vector>

#include "hypermatch/rpcm.hpp"
#include "hypermatch/spectral.hpp"
#include "hypermatch/transport.hpp"

namespace hm::bounds {

using spectral::Mode;
using transport::CostFn;

struct QFunction {
    enum class Kind { log_loglog, constant_on_dyadics };
    Kind kind = Kind::log_loglog;
    double gamma = 2.0;  // log-loglog
    double t0 = 1.0;     // constant-on-dyadics: q ≡ ⌊log₂ t0⌋ + 1 on [1, t0]

    static QFunction log_loglog(double gamma);
    static QFunction constant_on_dyadics(double t0);

    double operator()(double x) const;
    // Σ_k 1/q(2^k) (over 2^k ≤ t0 for constant-on-dyadics).
    double a_q() const;
};

enum class BlVariant { weighted_q, log_t0 };

// Σ_{0<‖m‖≤t0} ‖m‖^{−2} |f(m)|² + t0^{−2}; modes and coeffs aligned.
double bl_w2_bound(const std::vector<Mode>& modes, std::span<const double> coeffs, double t0);

double bl_general_bound(const std::vector<Mode>& modes, std::span<const double> coeffs,
                        double t0, const CostFn& w, const QFunction& q, BlVariant variant);

double alpha2(double n, double b_n, int d);
double alpha_p(double n, double b_n, int d, double p);

// n (1 + ∫_{n^{−1/d}}^{c0} ε(r) r^{d−3} dr), log-spaced nodes, 64 per decade.
double alpha2_hu(double n, const rpcm::RpcmModel& model, double c0, int d);

double tail_bound(double r, double sigma_mu, double sigma_nu, int d);

// Mean of the dimension-appropriate weight over a distance sample.
double weight_moment(std::span<const double> dists, int d, double gamma);
double dimension_weight(double x, int d, double gamma);

}  // namespace hm::bounds
