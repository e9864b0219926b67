#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hypermatch/error.hpp"
#include "hypermatch/harness.hpp"
#include "hypermatch/process.hpp"
#include "hypermatch/rpcm.hpp"
#include "hypermatch/transport.hpp"

namespace hm::harness {

namespace {

struct ExperimentInfo {
    Experiment kind;
    const char* name;
    const char* summary;
};

const ExperimentInfo experiment_table[] = {
    {Experiment::rates, "rates", "replica-mean semidiscrete W2^2 against alpha2 over an n-grid"},
    {Experiment::spectrum, "spectrum", "scattering intensity against S(k) + Var/(pi_d n)"},
    {Experiment::variance, "variance", "Monte Carlo count variance against the RPCM prediction"},
    {Experiment::tails, "tails", "dyadic matching distance tails and slope fit"},
    {Experiment::bl_check, "bl-check", "measured W2^2 on the unit torus against Fourier bounds"},
    {Experiment::matching_moments, "matching-moments", "typical-distance weight moments of a matcher"},
};

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        fail(ErrorKind::config, "key '" + key + "': not a number: '" + v + "'");
    }
    if (used != v.size() || !std::isfinite(x))
        fail(ErrorKind::config, "key '" + key + "': not a number: '" + v + "'");
    return x;
}

long to_long(const std::string& key, const std::string& v) {
    double x = to_double(key, v);
    if (x != std::floor(x) || std::fabs(x) > 9.0e15)
        fail(ErrorKind::config, "key '" + key + "': not an integer: '" + v + "'");
    return static_cast<long>(x);
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(v);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        // a^b shorthand, e.g. 2^6
        auto caret = item.find('^');
        if (caret != std::string::npos) {
            double base = to_double(key, trim(item.substr(0, caret)));
            double ex = to_double(key, trim(item.substr(caret + 1)));
            out.push_back(std::pow(base, ex));
        } else {
            out.push_back(to_double(key, item));
        }
    }
    if (out.empty()) fail(ErrorKind::config, "key '" + key + "': empty list");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    std::string l = lower(v);
    if (l == "1" || l == "true" || l == "yes" || l == "on") return true;
    if (l == "0" || l == "false" || l == "no" || l == "off") return false;
    fail(ErrorKind::config, "key '" + key + "': not a boolean: '" + v + "'");
}

const char* grid_kind_name(ExperimentConfig::GridKind k) {
    switch (k) {
        case ExperimentConfig::GridKind::volume: return "n";
        case ExperimentConfig::GridKind::count: return "counts";
        case ExperimentConfig::GridKind::side: return "sides";
    }
    return "n";
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& e : experiment_table) v.emplace_back(e.name);
        return v;
    }();
    return names;
}

Experiment parse_experiment(const std::string& name) {
    for (const auto& e : experiment_table)
        if (name == e.name) return e.kind;
    fail(ErrorKind::config, "unknown experiment '" + name + "'");
}

std::string experiment_name(Experiment e) {
    for (const auto& x : experiment_table)
        if (x.kind == e) return x.name;
    return "?";
}

std::string experiment_summary(Experiment e) {
    for (const auto& x : experiment_table)
        if (x.kind == e) return x.summary;
    return "";
}

void apply_key(ExperimentConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
    const std::string key = lower(trim(raw_key));
    const std::string value = trim(raw_value);
    if (value.empty()) fail(ErrorKind::config, "key '" + key + "' has no value");

    if (key == "experiment") cfg.experiment = parse_experiment(value);
    else if (key == "name") cfg.name = value;
    else if (key == "process" || key == "process_a") cfg.process = value;
    else if (key == "process_b") cfg.process_b = value;
    else if (key == "model") cfg.model = value;
    else if (key == "d") cfg.d = static_cast<int>(to_long(key, value));
    else if (key == "n" || key == "n_grid") {
        cfg.grid = to_list(key, value);
        cfg.grid_kind = ExperimentConfig::GridKind::volume;
    } else if (key == "counts") {
        cfg.grid = to_list(key, value);
        cfg.grid_kind = ExperimentConfig::GridKind::count;
    } else if (key == "sides") {
        cfg.grid = to_list(key, value);
        cfg.grid_kind = ExperimentConfig::GridKind::side;
    } else if (key == "replicas") cfg.replicas = static_cast<int>(to_long(key, value));
    else if (key == "seed") {
        long s = to_long(key, value);
        if (s < 0) fail(ErrorKind::config, "seed must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "p") cfg.p = to_double(key, value);
    else if (key == "gamma") cfg.gamma = to_double(key, value);
    else if (key == "q_gamma") cfg.q_gamma = to_double(key, value);
    else if (key == "t0") cfg.t0 = to_double(key, value);
    else if (key == "c0") cfg.c0 = to_double(key, value);
    else if (key == "grid_per_point") cfg.grid_per_point = static_cast<int>(to_long(key, value));
    else if (key == "core_fraction") cfg.core_fraction = to_double(key, value);
    else if (key == "max_modes") cfg.max_modes = static_cast<int>(to_long(key, value));
    else if (key == "sinkhorn_cutoff") cfg.sinkhorn_cutoff = to_double(key, value);
    else if (key == "sinkhorn_lambda") cfg.sinkhorn_lambda = to_double(key, value);
    else if (key == "sinkhorn_iterations")
        cfg.sinkhorn_iterations = static_cast<int>(to_long(key, value));
    else if (key == "cost") cfg.cost = value;
    else if (key == "matcher") cfg.matcher = lower(value);
    else if (key == "out") cfg.out = value;
    else if (key == "workers") cfg.workers = static_cast<int>(to_long(key, value));
    else if (key == "resume") cfg.resume = to_bool(key, value);
    else fail(ErrorKind::config, "unknown key '" + key + "'");
}

std::vector<ExperimentConfig> parse_config_text(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> defaults;
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> kv;
        int line;
    };
    std::vector<Section> sections;

    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail(ErrorKind::config, "line " + std::to_string(lineno) + ": bad section header");
            std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty())
                fail(ErrorKind::config, "line " + std::to_string(lineno) + ": empty section name");
            for (const auto& s : sections)
                if (s.name == name) fail(ErrorKind::config, "duplicate section '" + name + "'");
            sections.push_back({name, {}, lineno});
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::config, "line " + std::to_string(lineno) + ": expected key = value");
        auto kv = std::make_pair(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        if (sections.empty()) defaults.push_back(kv);
        else sections.back().kv.push_back(kv);
    }

    if (sections.empty()) sections.push_back({"run", {}, 0});

    std::vector<ExperimentConfig> out;
    for (const auto& s : sections) {
        ExperimentConfig cfg;
        cfg.name = s.name;
        bool has_kind = false;
        for (const auto& [k, v] : defaults) {
            apply_key(cfg, k, v);
            has_kind = has_kind || lower(k) == "experiment";
        }
        for (const auto& [k, v] : s.kv) {
            apply_key(cfg, k, v);
            has_kind = has_kind || lower(k) == "experiment";
        }
        if (!has_kind) {
            bool known = false;
            for (const auto& e : experiment_table)
                if (s.name == e.name) known = true;
            if (!known)
                fail(ErrorKind::config,
                     "section '" + s.name + "' does not name an experiment");
            cfg.experiment = parse_experiment(s.name);
        }
        out.push_back(cfg);
    }
    return out;
}

std::vector<ExperimentConfig> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::config, "cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_override(std::vector<ExperimentConfig>& cfgs, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        fail(ErrorKind::config, "override '" + assignment + "' is not key=value");
    std::string key = trim(assignment.substr(0, eq));
    std::string value = trim(assignment.substr(eq + 1));
    auto dot = key.find('.');
    if (dot == std::string::npos) {
        for (auto& c : cfgs) apply_key(c, key, value);
        return;
    }
    std::string section = key.substr(0, dot);
    bool hit = false;
    for (auto& c : cfgs)
        if (c.name == section) {
            apply_key(c, key.substr(dot + 1), value);
            hit = true;
        }
    if (!hit) fail(ErrorKind::config, "override names unknown section '" + section + "'");
}

geom::Window ExperimentConfig::window(std::size_t i) const {
    double v = grid.at(i);
    switch (grid_kind) {
        case GridKind::volume: return geom::Window::make(d, v);
        case GridKind::count: return geom::Window::from_count(d, v);
        case GridKind::side: return geom::Window::from_side(d, v);
    }
    return geom::Window::make(d, v);
}

void validate(const ExperimentConfig& cfg) {
    auto bad = [&](const std::string& msg) { fail(ErrorKind::config, cfg.name + ": " + msg); };
    if (cfg.d < 1 || cfg.d > geom::max_dim) bad("d must be in 1..4");
    if (cfg.grid.empty()) bad("empty n-grid (set n, counts or sides)");
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
        if (!(cfg.grid[i] > 0.0)) bad("n-grid values must be positive");
        if (i > 0 && !(cfg.grid[i] > cfg.grid[i - 1])) bad("n-grid must be strictly ascending");
    }
    if (cfg.replicas < 1) bad("replicas must be >= 1");
    if (cfg.workers < 1) bad("workers must be >= 1");
    if (cfg.grid_per_point < 1) bad("grid_per_point must be >= 1");
    if (!(cfg.core_fraction > 0.0 && cfg.core_fraction <= 1.0)) bad("core_fraction must be in (0, 1]");
    if (!(cfg.c0 > 0.0)) bad("c0 must be positive");
    if (cfg.t0 < 0.0) bad("t0 must be non-negative");
    if (!(cfg.p >= 1.0)) bad("p must be >= 1");
    if (!(cfg.gamma > 1.0)) bad("gamma must be > 1");
    if (!(cfg.q_gamma > 1.0)) bad("q_gamma must be > 1");
    if (cfg.sinkhorn_cutoff < 0.0) bad("sinkhorn_cutoff must be non-negative");
    if (!(cfg.sinkhorn_lambda > 0.0)) bad("sinkhorn_lambda must be positive");
    if (cfg.sinkhorn_iterations < 1) bad("sinkhorn_iterations must be >= 1");
    if (cfg.out.empty()) bad("out must not be empty");

    auto check_process = [&](const std::string& text) {
        try {
            auto spec = process::ProcessSpec::parse(text);
            if (spec.kind == process::Kind::ginibre && cfg.d != 2) bad("ginibre requires d = 2");
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::config) throw;
            bad(e.what());
        }
    };
    check_process(cfg.process);

    switch (cfg.experiment) {
        case Experiment::rates:
            if (cfg.d == 1 && cfg.grid_per_point < 1) bad("grid_per_point must be >= 1");
            break;
        case Experiment::spectrum:
            if (cfg.replicas < 2) bad("spectrum needs at least 2 replicas");
            break;
        case Experiment::variance:
            if (cfg.replicas < 100) bad("variance needs at least 100 replicas");
            break;
        case Experiment::tails:
        case Experiment::matching_moments: {
            check_process(cfg.process_b);
            if (cfg.experiment == Experiment::tails || cfg.matcher == "dyadic") {
                for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
                    double side = cfg.window(i).side;
                    double k = std::round(std::log2(side));
                    if (k < 1 || std::fabs(side - std::ldexp(1.0, static_cast<int>(k))) > 1e-9)
                        bad("dyadic matching needs sides that are powers of two (use sides = ...)");
                }
            }
            if (cfg.matcher != "exact" && cfg.matcher != "stable" && cfg.matcher != "dyadic")
                bad("matcher must be exact, stable or dyadic");
            try {
                (void)transport::CostFn::parse(cfg.cost);
            } catch (const Error& e) {
                bad(e.what());
            }
            break;
        }
        case Experiment::bl_check:
            break;
    }
    if (!cfg.model.empty()) {
        try {
            (void)rpcm::RpcmModel::parse(cfg.model, cfg.d);
        } catch (const Error& e) {
            bad(e.what());
        }
    }
}

std::string ExperimentConfig::canonical() const {
    // Fields in fixed order; values normalized so equal configs hash equally
    // regardless of how they were written. Output location, worker count and
    // resume mode do not change results and are left out.
    std::ostringstream os;
    os << "experiment=" << experiment_name(experiment) << '\n';
    os << "process=" << process::ProcessSpec::parse(process).name() << '\n';
    if (experiment == Experiment::tails || experiment == Experiment::matching_moments)
        os << "process_b=" << process::ProcessSpec::parse(process_b).name() << '\n';
    os << "model=" << model << '\n';
    os << "d=" << d << '\n';
    os << "grid_kind=" << grid_kind_name(grid_kind) << '\n';
    os << "grid=";
    for (std::size_t i = 0; i < grid.size(); ++i) os << (i ? "," : "") << g17(grid[i]);
    os << '\n';
    os << "replicas=" << replicas << '\n';
    os << "seed=" << seed << '\n';
    os << "p=" << g17(p) << '\n';
    os << "gamma=" << g17(gamma) << '\n';
    os << "q_gamma=" << g17(q_gamma) << '\n';
    os << "t0=" << g17(t0) << '\n';
    os << "c0=" << g17(c0) << '\n';
    os << "grid_per_point=" << grid_per_point << '\n';
    os << "core_fraction=" << g17(core_fraction) << '\n';
    os << "max_modes=" << max_modes << '\n';
    os << "sinkhorn_cutoff=" << g17(sinkhorn_cutoff) << '\n';
    os << "sinkhorn_lambda=" << g17(sinkhorn_lambda) << '\n';
    os << "sinkhorn_iterations=" << sinkhorn_iterations << '\n';
    os << "cost=" << transport::CostFn::parse(cost).name() << '\n';
    os << "matcher=" << matcher << '\n';
    return os.str();
}

std::string ExperimentConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json ExperimentConfig::to_json() const {
    json j;
    j["name"] = name;
    j["experiment"] = experiment_name(experiment);
    j["process"] = process;
    j["process_b"] = process_b;
    j["model"] = model;
    j["d"] = d;
    j["grid_kind"] = grid_kind_name(grid_kind);
    j["grid"] = grid;
    j["replicas"] = replicas;
    j["seed"] = seed;
    j["p"] = p;
    j["gamma"] = gamma;
    j["q_gamma"] = q_gamma;
    j["t0"] = t0;
    j["c0"] = c0;
    j["grid_per_point"] = grid_per_point;
    j["core_fraction"] = core_fraction;
    j["max_modes"] = max_modes;
    j["sinkhorn_cutoff"] = sinkhorn_cutoff;
    j["sinkhorn_lambda"] = sinkhorn_lambda;
    j["sinkhorn_iterations"] = sinkhorn_iterations;
    j["cost"] = cost;
    j["matcher"] = matcher;
    j["out"] = out;
    j["workers"] = workers;
    return j;
}

}  // namespace hm::harness
