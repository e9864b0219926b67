#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "hypermatch/error.hpp"
#include "hypermatch/transport.hpp"

namespace hm::transport {

CostFn CostFn::power(double p) {
    if (!(p > 0.0)) fail(ErrorKind::config, "power cost needs p > 0");
    return CostFn{Kind::power, p, 0.0};
}

CostFn CostFn::log_weighted(double a, double gamma) {
    if (!(a > 0.0)) fail(ErrorKind::config, "log-weighted cost needs a > 0");
    if (!(gamma > 1.0)) fail(ErrorKind::config, "log-weighted cost needs gamma > 1");
    return CostFn{Kind::log_weighted, a, gamma};
}

CostFn CostFn::parse(const std::string& text) {
    auto num = [&](const std::string& s) {
        try {
            return std::stod(s);
        } catch (const std::exception&) {
            fail(ErrorKind::config, "bad number in cost '" + text + "'");
        }
    };
    if (text.rfind("power:", 0) == 0) return power(num(text.substr(6)));
    if (text.rfind("log-weighted:", 0) == 0) {
        const std::string rest = text.substr(13);
        const auto colon = rest.find(':');
        if (colon == std::string::npos)
            fail(ErrorKind::config, "log-weighted cost needs a:gamma");
        return log_weighted(num(rest.substr(0, colon)), num(rest.substr(colon + 1)));
    }
    fail(ErrorKind::config, "unknown cost '" + text + "'");
}

double CostFn::operator()(double x) const {
    if (x <= 0.0) return 0.0;
    if (kind == Kind::power) return exponent == 2.0 ? x * x : std::pow(x, exponent);
    return std::pow(x, exponent) / (1.0 + std::pow(std::abs(std::log(x)), gamma));
}

std::string CostFn::name() const {
    char buf[96];
    if (kind == Kind::power)
        std::snprintf(buf, sizeof buf, "power:%.17g", exponent);
    else
        std::snprintf(buf, sizeof buf, "log-weighted:%.17g:%.17g", exponent, gamma);
    return buf;
}

double cost_of(const MatchResult& match, const CostFn& cost) {
    double total = 0.0;
    for (double x : match.distances) total += cost(x);
    return total;
}

void write_match_csv(std::ostream& os, const MatchResult& match) {
    os << "# hypermatch-schema v1\n";
    os << "src_idx,tgt_idx,distance,level\n";
    char buf[40];
    for (std::size_t i = 0; i < match.pairs.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", match.distances[i]);
        const int level = i < match.levels.size() ? match.levels[i] : -1;
        os << match.pairs[i].first << ',' << match.pairs[i].second << ',' << buf << ',' << level
           << '\n';
    }
}

}  // namespace hm::transport
