#pragma once

// Reduced pair correlation measures β of named processes and the quantities
// derived from them: β(R^d), ε(t), b_n, S(k), the log-tail integral and the
// exact count variance on Λ_n.

#include <span>
#include <string>
#include <vector>

namespace hm::rpcm {

enum class Kind { poisson, ginibre_unit, cloaked_lattice, table };

class RpcmModel {
public:
    static RpcmModel poisson(int d);
    static RpcmModel ginibre_unit();
    static RpcmModel cloaked_lattice(int d);
    // Radial table: β(x) = sign · density(|x|), linear interpolation, zero past
    // the last radius.
    static RpcmModel table(int d, std::vector<double> r, std::vector<double> density, int sign,
                           bool integrable);
    // File format: a header line `rpcm-table d=<d> sign=<+1|-1> integrable=<0|1>`,
    // then `r density` rows; lines starting with '#' are ignored.
    static RpcmModel load_table(const std::string& path);
    // "poisson", "ginibre-unit", "cloaked-lattice" or "table:<path>".
    static RpcmModel parse(const std::string& text, int d);

    Kind kind() const { return kind_; }
    int d() const { return d_; }
    bool integrable() const { return integrable_; }
    std::string name() const;

    // Signed β density at x (d coordinates).
    double density(const double* x) const;
    // Signed mass of β on the sphere of radius r per unit radius.
    double radial_mass(double r) const;
    // Radius beyond which |β| is negligible (< 1e−10) or exactly zero.
    double cutoff() const;
    // Per-axis half-width of a box containing the support.
    double axis_cutoff() const;
    // Radii where the radial profile has kinks.
    std::vector<double> radial_breaks() const;

private:
    double table_value(double r) const;

    Kind kind_ = Kind::poisson;
    int d_ = 1;
    bool integrable_ = true;
    int sign_ = 1;
    std::vector<double> r_;
    std::vector<double> f_;
};

double beta_total(const RpcmModel& m);
double epsilon(const RpcmModel& m, double t);
double b_n(const RpcmModel& m, double n);
double structure_factor(const RpcmModel& m, std::span<const double> k);
double log_integral(const RpcmModel& m);
// ∫ |x| |β|(dx)
double abs_first_moment(const RpcmModel& m);
// π_d n (1 + β(R^d)) − ∫ γ_n(z) β(dz)
double predicted_variance(const RpcmModel& m, double n);

// Surface area of the unit sphere in R^d.
double sphere_area(int d);

}  // namespace hm::rpcm
