#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "hypermatch/error.hpp"
#include "hypermatch/process.hpp"

namespace hm::process {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_point_set(std::ostream& os, const PointSet& p) {
    const int d = p.window.d;
    os << d << ' ' << fmt17(p.window.n) << ' ' << p.process << ' ' << p.seed << ' ' << p.size()
       << '\n';
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double* x = p.point(i);
        for (int k = 0; k < d; ++k) os << (k ? " " : "") << fmt17(x[k]);
        os << '\n';
    }
}

PointSet read_point_set(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) fail(ErrorKind::io, "missing point-set header");
    std::istringstream hs(header);
    int d = 0;
    double n = 0.0;
    std::string tag;
    std::uint64_t seed = 0;
    std::size_t count = 0;
    if (!(hs >> d >> n >> tag >> seed >> count))
        fail(ErrorKind::io, "malformed point-set header '" + header + "'");
    Window w = Window::make(d, n);
    // Lattice windows have integer sides; undo the rounding of the n round trip.
    if (w.side_is_integer()) w = Window::from_side(d, std::round(w.side));
    PointSet p{w, {}, tag, seed};
    p.coords.resize(count * static_cast<std::size_t>(d));
    for (double& c : p.coords)
        if (!(is >> c)) fail(ErrorKind::io, "point-set body shorter than declared count");
    return p;
}

}  // namespace hm::process
