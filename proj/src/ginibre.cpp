#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "hypermatch/error.hpp"
#include "hypermatch/process.hpp"
#include "hypermatch/rng.hpp"

#include <lapacke.h>

namespace hm::process {

int ginibre_matrix_size(const Window& w) {
    // Circumscribed radius of Λ_n, with a 1.2 radius margin, in unit-intensity
    // units; the eigenvalue disk of an m×m matrix has area π m / π = m there.
    const double r = 1.2 * w.side * std::sqrt(0.25 * w.d);
    return static_cast<int>(std::ceil(geom::pi * r * r - 1e-9));
}

std::vector<double> ginibre_eigenvalues(int m, std::uint64_t seed) {
    if (m < 1) return {};
    CounterRng rng(seed);
    // Upper Hessenberg form of a Ginibre matrix (unitarily similar, same law of
    // the spectrum): iid standard complex normals on and above the diagonal,
    // real subdiagonal entries with squares ~ Gamma(m−1−j, 1).
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    std::vector<std::complex<double>> h(static_cast<std::size_t>(m) * m);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i <= j; ++i) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            h[static_cast<std::size_t>(j) * m + i] = {re, im};
        }
        if (j + 1 < m) {
            std::gamma_distribution<double> g(static_cast<double>(m - 1 - j), 1.0);
            h[static_cast<std::size_t>(j) * m + j + 1] = std::sqrt(g(rng));
        }
    }
    std::vector<std::complex<double>> eig(static_cast<std::size_t>(m));
    const lapack_int info = LAPACKE_zhseqr(
        LAPACK_COL_MAJOR, 'E', 'N', m, 1, m, reinterpret_cast<lapack_complex_double*>(h.data()),
        m, reinterpret_cast<lapack_complex_double*>(eig.data()), nullptr, m);
    if (info != 0) fail(ErrorKind::non_convergence, "Hessenberg QR did not converge");
    std::vector<double> out(2 * static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        out[2 * i] = eig[i].real();
        out[2 * i + 1] = eig[i].imag();
    }
    return out;
}

PointSet sample_ginibre(const Window& w, std::uint64_t seed) {
    if (w.d != 2) fail(ErrorKind::unsupported_dimension, "ginibre sampler needs d = 2");
    const int m = ginibre_matrix_size(w);
    const std::vector<double> eig = ginibre_eigenvalues(m, seed);
    const double scale = 1.0 / std::sqrt(geom::pi);
    const double half = 0.5 * w.side;
    PointSet p{w, {}, "ginibre", seed};
    for (int i = 0; i < m; ++i) {
        const double x = eig[2 * i] * scale;
        const double y = eig[2 * i + 1] * scale;
        if (x > -half && x <= half && y > -half && y <= half) {
            p.coords.push_back(x);
            p.coords.push_back(y);
        }
    }
    return p;
}

}  // namespace hm::process
