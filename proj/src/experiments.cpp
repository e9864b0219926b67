#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "hypermatch/bounds.hpp"
#include "hypermatch/error.hpp"
#include "hypermatch/harness.hpp"
#include "hypermatch/process.hpp"
#include "hypermatch/rng.hpp"
#include "hypermatch/rpcm.hpp"
#include "hypermatch/spectral.hpp"
#include "hypermatch/transport.hpp"

namespace hm::harness {

namespace fs = std::filesystem;

namespace {

// One (n, replica) measurement. `values` has a fixed layout per experiment;
// `extra` carries variable-length data (pooled distances).
struct TaskOut {
    std::vector<double> values;
    std::vector<double> extra;
};

using TaskFn = std::function<TaskOut(std::size_t n_index, int replica, std::uint64_t seed)>;

std::uint64_t task_seed(const ExperimentConfig& cfg, std::size_t i, int r) {
    return substream(substream(cfg.seed, i), static_cast<std::uint64_t>(r));
}

// Checkpoint lines: `<task> <values...> | <extra...> ;` in %.17g, so reloaded
// values are bit-identical.
std::string checkpoint_line(std::size_t t, const TaskOut& o) {
    std::string s = std::to_string(t);
    for (double v : o.values) s += ' ' + fmt(v);
    s += " |";
    for (double v : o.extra) s += ' ' + fmt(v);
    s += " ;\n";
    return s;
}

std::vector<std::optional<TaskOut>> load_checkpoint(const std::string& path, const std::string& hash,
                                                    std::size_t tasks) {
    std::vector<std::optional<TaskOut>> out(tasks);
    std::ifstream f(path);
    if (!f) return out;
    std::string line;
    if (!std::getline(f, line) || line != "hypermatch-checkpoint " + hash) return out;
    while (std::getline(f, line)) {
        // A torn final line lacks the terminator and is recomputed.
        if (line.size() < 2 || line.compare(line.size() - 2, 2, " ;") != 0) continue;
        line.resize(line.size() - 2);
        auto bar = line.find('|');
        if (bar == std::string::npos) continue;
        std::istringstream head(line.substr(0, bar));
        std::size_t t = 0;
        if (!(head >> t) || t >= tasks) continue;
        TaskOut o;
        std::string tok;
        while (head >> tok) o.values.push_back(std::strtod(tok.c_str(), nullptr));
        std::istringstream tail(line.substr(bar + 1));
        while (tail >> tok) o.extra.push_back(std::strtod(tok.c_str(), nullptr));
        out[t] = std::move(o);
    }
    return out;
}

// Runs all tasks over a bounded pool; results land in task-index order.
std::vector<TaskOut> run_tasks(const ExperimentConfig& cfg, const std::string& dir, const TaskFn& fn,
                               std::size_t* resumed) {
    const std::size_t reps = static_cast<std::size_t>(cfg.replicas);
    const std::size_t tasks = cfg.grid_size() * reps;
    const std::string ckpt = (fs::path(dir) / "checkpoint.txt").string();
    const std::string hash = cfg.hash();

    std::vector<std::optional<TaskOut>> slots =
        cfg.resume ? load_checkpoint(ckpt, hash, tasks) : std::vector<std::optional<TaskOut>>(tasks);
    *resumed = 0;
    for (const auto& s : slots) *resumed += s ? 1 : 0;

    std::ofstream log;
    if (cfg.resume && *resumed > 0) {
        log.open(ckpt, std::ios::app | std::ios::binary);
    } else {
        log.open(ckpt, std::ios::trunc | std::ios::binary);
        log << "hypermatch-checkpoint " << hash << '\n';
    }
    if (!log) fail(ErrorKind::io, "cannot write checkpoint '" + ckpt + "'");
    log.flush();

    std::vector<std::size_t> todo;
    for (std::size_t t = 0; t < tasks; ++t)
        if (!slots[t]) todo.push_back(t);

    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex mu;
    std::exception_ptr first_error;

    auto worker = [&] {
        while (!stop.load()) {
            const std::size_t k = next.fetch_add(1);
            if (k >= todo.size()) return;
            const std::size_t t = todo[k];
            const std::size_t i = t / reps;
            const int r = static_cast<int>(t % reps);
            try {
                TaskOut o = fn(i, r, task_seed(cfg, i, r));
                std::lock_guard<std::mutex> lock(mu);
                log << checkpoint_line(t, o);
                log.flush();
                slots[t] = std::move(o);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
                stop.store(true);
            }
        }
    };

    const int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(todo.size())));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    log.close();
    if (first_error) std::rethrow_exception(first_error);

    std::vector<TaskOut> out;
    out.reserve(tasks);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

std::string default_model(const ExperimentConfig& cfg) {
    if (!cfg.model.empty()) return cfg.model;
    auto spec = process::ProcessSpec::parse(cfg.process);
    switch (spec.kind) {
        case process::Kind::poisson: return "poisson";
        case process::Kind::cloaked_lattice: return "cloaked-lattice";
        case process::Kind::ginibre: return "ginibre-unit";
        default: return "";
    }
}

std::optional<rpcm::RpcmModel> model_for(const ExperimentConfig& cfg) {
    std::string name = default_model(cfg);
    if (name.empty()) return std::nullopt;
    return rpcm::RpcmModel::parse(name, cfg.d);
}

// Evaluates f, mapping library errors to NaN for optional columns.
double or_nan(const std::function<double()>& f) {
    try {
        return f();
    } catch (const Error&) {
        return NAN;
    }
}

double t0_for(const ExperimentConfig& cfg, const geom::Window& w) {
    return cfg.t0 > 0.0 ? cfg.t0 : cfg.c0 * w.scale();
}

std::vector<double> slice(const std::vector<TaskOut>& outs, std::size_t i, int reps, std::size_t k) {
    std::vector<double> v;
    v.reserve(reps);
    for (int r = 0; r < reps; ++r) v.push_back(outs[i * reps + r].values.at(k));
    return v;
}

struct Built {
    Table table;
    std::vector<std::string> raw_columns;
    json summary = json::object();
    std::vector<PlotSpec> plots;
    std::vector<std::pair<std::string, Table>> extra_tables;
};

std::string meta(const ExperimentConfig& cfg) {
    return experiment_name(cfg.experiment) + ", " + cfg.process + ", d=" + std::to_string(cfg.d) +
           ", " + std::to_string(cfg.replicas) + " replicas";
}

// ---------------------------------------------------------------- rates

Built run_rates(const ExperimentConfig& cfg, const std::string& dir, std::size_t* resumed) {
    const auto spec = process::ProcessSpec::parse(cfg.process);
    const auto model = model_for(cfg);
    const std::size_t gn = cfg.grid_size();

    std::vector<bool> entropic(gn, false);
    bool any_entropic = false;
    for (std::size_t i = 0; i < gn; ++i) {
        entropic[i] = cfg.sinkhorn_cutoff > 0.0 && cfg.window(i).volume() > cfg.sinkhorn_cutoff;
        any_entropic = any_entropic || entropic[i];
    }
    // Both solvers run at the largest exact grid point (or the first point).
    std::size_t cross = 0;
    for (std::size_t i = 0; i < gn; ++i)
        if (!entropic[i]) cross = i;

    auto sinkhorn = [&](const geom::PointSet& p) {
        const double h = transport::mean_nn_spacing(p);
        return transport::sinkhorn_w2(p, cfg.grid_per_point, cfg.sinkhorn_lambda * h * h,
                                      cfg.sinkhorn_iterations);
    };

    TaskFn fn = [&](std::size_t i, int r, std::uint64_t seed) {
        const geom::Window w = cfg.window(i);
        const geom::PointSet p = process::sample(spec, w, seed);
        TaskOut o;
        double cost = 0.0, qb = 0.0, rel = NAN;
        if (entropic[i]) {
            cost = sinkhorn(p);
        } else {
            auto sd = transport::semidiscrete_w2(p, cfg.grid_per_point);
            cost = sd.cost;
            qb = sd.quantization_bound;
            if (any_entropic && i == cross && r == 0) {
                const double ent = sinkhorn(p);
                rel = std::abs(ent - cost) / std::max(cost, 1e-300);
            }
        }
        o.values = {static_cast<double>(p.size()), cost, qb, entropic[i] ? 1.0 : 0.0, rel};
        return o;
    };
    auto outs = run_tasks(cfg, dir, fn, resumed);

    Built b;
    b.raw_columns = {"count", "cost", "quantization_bound", "entropic", "cross_check_rel"};
    if (any_entropic) {
        const double rel = outs[cross * cfg.replicas].values[4];
        b.summary["cross_check_n"] = cfg.window(cross).n;
        b.summary["cross_check_rel"] = rel;
        if (!(rel <= 0.05))
            fail(ErrorKind::numerical_guard,
                 "exact and entropic solvers disagree by " + fmt(100.0 * rel) + "% at n = " +
                     fmt(cfg.window(cross).n));
    }

    b.table.columns = {"n",       "side",    "count_mean", "W2sq_mean",   "W2sq_se",
                       "alpha2",  "ratio",   "alpha2_hu",  "ratio_hu",    "cost_over_n",
                       "cost_over_nlogn",    "quantization_bound_mean",   "entropic"};
    bool hu = false;
    if (model && model->integrable())
        hu = std::abs(1.0 + or_nan([&] { return rpcm::beta_total(*model); })) < 1e-6;
    for (std::size_t i = 0; i < gn; ++i) {
        const geom::Window w = cfg.window(i);
        auto counts = spectral::mean_se(slice(outs, i, cfg.replicas, 0));
        auto cost = spectral::mean_se(slice(outs, i, cfg.replicas, 1));
        auto qb = spectral::mean_se(slice(outs, i, cfg.replicas, 2));
        double a2 = NAN, a2hu = NAN;
        if (model && w.n >= 2.0)
            a2 = or_nan([&] { return bounds::alpha2(w.n, rpcm::b_n(*model, w.n), cfg.d); });
        if (model && hu && w.n >= 2.0)
            a2hu = or_nan([&] { return bounds::alpha2_hu(w.n, *model, cfg.c0, cfg.d); });
        b.table.add({w.n, w.side, counts.mean, cost.mean, cost.se, a2, cost.mean / a2, a2hu,
                     cost.mean / a2hu, cost.mean / w.n, cost.mean / (w.n * std::log(w.n)), qb.mean,
                     entropic[i] ? 1.0 : 0.0});
    }

    auto n = b.table.column("n");
    auto mean = b.table.column("W2sq_mean");
    auto a2 = b.table.column("alpha2");
    auto a2hu = b.table.column("alpha2_hu");
    PlotSpec p;
    p.name = "rates";
    p.title = "Transport cost vs n (" + meta(cfg) + ")";
    p.xlabel = "n";
    p.ylabel = "E W2^2";
    p.series.push_back({"measured", n, mean, false});
    auto scaled = [&](const std::vector<double>& ref, const std::string& label) {
        // Anchor the predicted curve at the first grid point where both exist.
        for (std::size_t i = 0; i < n.size(); ++i)
            if (std::isfinite(ref[i]) && ref[i] > 0 && mean[i] > 0) {
                std::vector<double> y;
                for (double v : ref) y.push_back(v * mean[i] / ref[i]);
                p.series.push_back({label, n, y, true});
                return;
            }
    };
    scaled(a2, "c * alpha2");
    scaled(a2hu, "c * alpha2_hu");
    b.plots.push_back(p);

    PlotSpec q;
    q.name = "rates-normalized";
    q.title = "Normalized cost (" + meta(cfg) + ")";
    q.xlabel = "n";
    q.ylabel = "cost / reference";
    q.logy = false;
    q.series.push_back({"cost / n", n, b.table.column("cost_over_n"), false});
    q.series.push_back({"cost / (n ln n)", n, b.table.column("cost_over_nlogn"), false});
    b.plots.push_back(q);
    return b;
}

// ---------------------------------------------------------------- spectrum

Built run_spectrum(const ExperimentConfig& cfg, const std::string& dir, std::size_t* resumed) {
    const auto spec = process::ProcessSpec::parse(cfg.process);
    const auto model = model_for(cfg);
    std::vector<std::vector<spectral::Mode>> modes(cfg.grid_size());
    for (std::size_t i = 0; i < cfg.grid_size(); ++i) {
        const geom::Window w = cfg.window(i);
        const double t0 = t0_for(cfg, w);
        if (t0 > cfg.c0 * w.scale() * (1.0 + 1e-12))
            fail(ErrorKind::config, "t0 must not exceed c0 n^{1/d}");
        modes[i] = spectral::mode_grid(cfg.d, t0);
        if (cfg.max_modes > 0 && modes[i].size() > static_cast<std::size_t>(cfg.max_modes))
            modes[i].resize(cfg.max_modes);
        if (modes[i].empty()) fail(ErrorKind::config, "no modes with 0 < |m| <= t0");
    }

    TaskFn fn = [&](std::size_t i, int, std::uint64_t seed) {
        const geom::Window w = cfg.window(i);
        const geom::PointSet p = process::sample(spec, w, seed);
        const double n_pts = static_cast<double>(p.size());
        TaskOut o;
        o.values = {n_pts, 0.0};
        for (const auto& m : modes[i]) {
            const double s = spectral::scattering_intensity(p, m);
            o.values.push_back(n_pts > 0 ? w.volume() / n_pts * s : 0.0);
            if (n_pts > 0) {
                const double f = spectral::fourier_coeff_sq(p, m);
                o.values[1] = std::max(o.values[1], std::abs(f * n_pts - s) / std::max(1.0, s));
            }
        }
        return o;
    };
    auto outs = run_tasks(cfg, dir, fn, resumed);

    Built b;
    b.raw_columns = {"count", "identity_error", "modes..."};
    b.table.columns = {"n", "mode", "m_norm", "k", "mean", "se", "s_model", "var_term", "prediction", "z"};
    double identity = 0.0;
    int within = 0, total = 0;
    for (std::size_t i = 0; i < cfg.grid_size(); ++i) {
        const geom::Window w = cfg.window(i);
        for (int r = 0; r < cfg.replicas; ++r) identity = std::max(identity, outs[i * cfg.replicas + r].values[1]);
        double var_term = NAN;
        if (model) var_term = or_nan([&] { return rpcm::predicted_variance(*model, w.n) / w.volume(); });
        for (std::size_t j = 0; j < modes[i].size(); ++j) {
            auto ms = spectral::mean_se(slice(outs, i, cfg.replicas, 2 + j));
            const double mn = spectral::mode_norm(modes[i][j]);
            const double k = mn / w.scale();
            double s_model = NAN;
            if (model) {
                std::vector<double> kv(cfg.d);
                for (int a = 0; a < cfg.d; ++a) kv[a] = modes[i][j][a] / w.scale();
                s_model = or_nan([&] { return rpcm::structure_factor(*model, kv); });
            }
            const double pred = s_model + var_term;
            const double z = (ms.mean - pred) / ms.se;
            if (std::isfinite(z)) {
                ++total;
                within += std::abs(z) <= 3.0 ? 1 : 0;
            }
            b.table.add({w.n, static_cast<double>(j), mn, k, ms.mean, ms.se, s_model, var_term, pred, z});
        }
    }
    b.summary["identity_max_error"] = identity;
    b.summary["within_3se_fraction"] = total ? static_cast<double>(within) / total : NAN;

    const std::size_t last = cfg.grid_size() - 1;
    std::vector<double> k, mean, pred;
    for (const auto& row : b.table.rows)
        if (row[0] == cfg.window(last).n) {
            k.push_back(row[3]);
            mean.push_back(row[4]);
            pred.push_back(row[8]);
        }
    PlotSpec p;
    p.name = "spectrum";
    p.title = "Scaled scattering intensity (" + meta(cfg) + ", n=" + fmt(cfg.window(last).n) + ")";
    p.xlabel = "|k|";
    p.ylabel = "mean (vol/N) S_n(k)";
    p.logx = p.logy = false;
    p.series.push_back({"measured", k, mean, false});
    p.series.push_back({"S(k) + Var/vol", k, pred, true});
    b.plots.push_back(p);
    return b;
}

// ---------------------------------------------------------------- variance

Built run_variance(const ExperimentConfig& cfg, const std::string& dir, std::size_t* resumed) {
    const auto spec = process::ProcessSpec::parse(cfg.process);
    const auto model = model_for(cfg);
    TaskFn fn = [&](std::size_t i, int, std::uint64_t seed) {
        TaskOut o;
        o.values = {static_cast<double>(spectral::window_count(spec, cfg.window(i), seed))};
        return o;
    };
    auto outs = run_tasks(cfg, dir, fn, resumed);

    Built b;
    b.raw_columns = {"count"};
    b.table.columns = {"n", "volume", "count_mean", "var", "var_se", "sigma", "sigma_se",
                       "predicted_var", "predicted_sigma", "z"};
    for (std::size_t i = 0; i < cfg.grid_size(); ++i) {
        const geom::Window w = cfg.window(i);
        auto counts = slice(outs, i, cfg.replicas, 0);
        auto mean = spectral::mean_se(counts);
        auto var = spectral::variance_se(counts);
        double pv = NAN;
        if (model) pv = or_nan([&] { return rpcm::predicted_variance(*model, w.n); });
        const double vol = w.volume();
        b.table.add({w.n, vol, mean.mean, var.mean, var.se, var.mean / vol, var.se / vol, pv, pv / vol,
                     (var.mean - pv) / var.se});
    }
    auto n = b.table.column("n");
    PlotSpec p;
    p.name = "variance";
    p.title = "Reduced count variance (" + meta(cfg) + ")";
    p.xlabel = "n";
    p.ylabel = "Var(N) / volume";
    p.series.push_back({"Monte Carlo", n, b.table.column("sigma"), false});
    p.series.push_back({"predicted", n, b.table.column("predicted_sigma"), true});
    b.plots.push_back(p);
    return b;
}

// ---------------------------------------------------------------- tails

struct SlopeFit {
    double slope = NAN, intercept = NAN, r_min = NAN, r_max = NAN;
    std::size_t tail_points = 0;
};

SlopeFit fit_tail(const spectral::EmpiricalCdf& cdf) {
    SlopeFit f;
    f.r_min = cdf.quantile(0.5);
    f.r_max = cdf.quantile(0.99);
    for (double v : cdf.sorted) f.tail_points += (v >= f.r_min && v <= f.r_max) ? 1 : 0;
    if (f.tail_points < 200)
        fail(ErrorKind::insufficient_tail_data,
             "only " + std::to_string(f.tail_points) + " pooled tail points (need 200)");
    if (!(f.r_max > f.r_min) || !(f.r_min > 0.0))
        fail(ErrorKind::insufficient_tail_data, "degenerate tail range");
    const int k = 32;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int j = 0; j < k; ++j) {
        const double r = f.r_min * std::pow(f.r_max / f.r_min, static_cast<double>(j) / (k - 1));
        const double x = std::log(r), y = std::log(cdf.survival(r));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    f.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / k;
    return f;
}

Built run_tails(const ExperimentConfig& cfg, const std::string& dir, std::size_t* resumed) {
    const auto spec_a = process::ProcessSpec::parse(cfg.process);
    const auto spec_b = process::ProcessSpec::parse(cfg.process_b);
    TaskFn fn = [&](std::size_t i, int, std::uint64_t seed) {
        const geom::Window w = cfg.window(i);
        const auto a = process::sample(spec_a, w, substream(seed, 0));
        const auto b = process::sample(spec_b, w, substream(seed, 1));
        transport::DyadicInfo info;
        const auto m = transport::dyadic_matching(a, b, substream(seed, 2), &info);
        TaskOut o;
        std::size_t core = 0;
        try {
            auto cdf = spectral::distance_cdf(m, a, cfg.core_fraction, info.levels + 1);
            core = cdf.size();
            o.extra = std::move(cdf.sorted);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::empty_core && e.kind() != ErrorKind::empty_input) throw;
        }
        o.values = {static_cast<double>(a.size()), static_cast<double>(b.size()),
                    static_cast<double>(info.closure_pairs),
                    static_cast<double>(m.unmatched_source.size()), static_cast<double>(core)};
        return o;
    };
    auto outs = run_tasks(cfg, dir, fn, resumed);

    Built b;
    b.raw_columns = {"count_a", "count_b", "closure_pairs", "unmatched_source", "core_pairs"};
    b.table.columns = {"n", "side", "pooled_points", "tail_points", "r_min", "r_max", "slope",
                       "intercept", "closure_pairs", "unmatched_source"};
    json per_n = json::array();
    for (std::size_t i = 0; i < cfg.grid_size(); ++i) {
        const geom::Window w = cfg.window(i);
        std::vector<double> pooled;
        double closure = 0, unmatched = 0;
        for (int r = 0; r < cfg.replicas; ++r) {
            const auto& o = outs[i * cfg.replicas + r];
            pooled.insert(pooled.end(), o.extra.begin(), o.extra.end());
            closure += o.values[2];
            unmatched += o.values[3];
        }
        const std::size_t pooled_n = pooled.size();
        auto cdf = spectral::make_cdf(std::move(pooled));
        if (cdf.size() == 0) fail(ErrorKind::insufficient_tail_data, "no matched distances in the core");
        SlopeFit f = fit_tail(cdf);
        b.table.add({w.n, w.side, static_cast<double>(pooled_n), static_cast<double>(f.tail_points), f.r_min,
                     f.r_max, f.slope, f.intercept, closure, unmatched});

        Table curve;
        curve.columns = {"r", "survival", "bound"};
        const double lo = std::max(cdf.quantile(0.01), 1e-6), hi = cdf.sorted.back();
        std::vector<double> rs, sv, bd;
        for (int j = 0; j < 64; ++j) {
            const double r = lo * std::pow(hi / lo, j / 63.0);
            const double s = cdf.survival(r);
            const double bound = bounds::tail_bound(r, 1.0, 1.0, cfg.d);
            curve.add({r, s, bound});
            rs.push_back(r);
            sv.push_back(s);
            bd.push_back(bound);
        }
        const std::string suffix = cfg.grid_size() > 1 ? "-" + std::to_string(i) : "";
        b.extra_tables.emplace_back("tails_cdf" + suffix, curve);

        PlotSpec p;
        p.name = "tails" + suffix;
        p.title = "Matching distance tail (" + cfg.process + " vs " + cfg.process_b + ", d=" +
                  std::to_string(cfg.d) + ", side=" + fmt(w.side) + ")";
        p.xlabel = "r";
        p.ylabel = "P(distance >= r)";
        p.series.push_back({"pooled survival", rs, sv, false});
        p.series.push_back({"bound r^(-d/2)", rs, bd, true});
        std::vector<double> fx{f.r_min, f.r_max},
            fy{std::exp(f.intercept) * std::pow(f.r_min, f.slope), std::exp(f.intercept) * std::pow(f.r_max, f.slope)};
        p.series.push_back({"fit slope " + fmt(std::round(f.slope * 1000) / 1000), fx, fy, true});
        b.plots.push_back(p);
        per_n.push_back({{"n", w.n}, {"slope", f.slope}, {"r_min", f.r_min}, {"r_max", f.r_max}});
    }
    b.summary["fits"] = per_n;
    return b;
}

// ---------------------------------------------------------------- bl-check

Built run_bl_check(const ExperimentConfig& cfg, const std::string& dir, std::size_t* resumed) {
    const auto spec = process::ProcessSpec::parse(cfg.process);
    const auto w_cost = transport::CostFn::parse(cfg.cost);
    TaskFn fn = [&](std::size_t i, int, std::uint64_t seed) {
        const geom::Window w = cfg.window(i);
        const double t0 = t0_for(cfg, w);
        const auto modes = spectral::mode_grid(cfg.d, t0);
        if (modes.empty()) fail(ErrorKind::config, "t0 < 1 leaves no modes");
        const geom::PointSet p = process::sample(spec, w, seed);
        const double n_pts = static_cast<double>(p.size());
        const auto coeffs = spectral::fourier_coefficients(p, modes);
        double ident = 0.0, coeff_sum = 0.0;
        for (std::size_t j = 0; j < modes.size(); ++j) {
            coeff_sum += coeffs[j];
            if (n_pts > 0) {
                const double s = spectral::scattering_intensity(p, modes[j]);
                ident = std::max(ident, std::abs(coeffs[j] * n_pts - s) / std::max(1.0, s));
            }
        }
        const double measured =
            transport::semidiscrete_w2(p, cfg.grid_per_point).cost / std::pow(w.n, 1.0 + 2.0 / cfg.d);
        const double bl = bounds::bl_w2_bound(modes, coeffs, t0);
        const double blq = or_nan([&] {
            return bounds::bl_general_bound(modes, coeffs, t0, w_cost, bounds::QFunction::log_loglog(cfg.q_gamma),
                                            bounds::BlVariant::weighted_q);
        });
        const double bll = or_nan([&] {
            return bounds::bl_general_bound(modes, coeffs, t0, w_cost, bounds::QFunction::constant_on_dyadics(t0),
                                            bounds::BlVariant::log_t0);
        });
        TaskOut o;
        o.values = {n_pts, measured, bl, blq, bll, ident, coeff_sum / modes.size(), measured / bl};
        return o;
    };
    auto outs = run_tasks(cfg, dir, fn, resumed);

    Built b;
    b.raw_columns = {"count", "measured", "bl_w2", "bl_weighted_q", "bl_log_t0", "identity_error",
                     "coeff_mean", "ratio"};
    b.table.columns = {"n",          "t0",           "count_mean",   "measured_mean", "measured_se",
                       "bound_mean", "c_n",          "bl_q_mean",    "bl_log_mean",   "identity_max",
                       "coeff_mean", "coeff_times_count"};
    double c_max = 0.0, c_min = INFINITY, ident = 0.0;
    for (std::size_t i = 0; i < cfg.grid_size(); ++i) {
        const geom::Window w = cfg.window(i);
        auto cnt = spectral::mean_se(slice(outs, i, cfg.replicas, 0));
        auto meas = spectral::mean_se(slice(outs, i, cfg.replicas, 1));
        auto bl = spectral::mean_se(slice(outs, i, cfg.replicas, 2));
        auto blq = spectral::mean_se(slice(outs, i, cfg.replicas, 3));
        auto bll = spectral::mean_se(slice(outs, i, cfg.replicas, 4));
        auto coeff = spectral::mean_se(slice(outs, i, cfg.replicas, 6));
        auto ratios = slice(outs, i, cfg.replicas, 7);
        auto idv = slice(outs, i, cfg.replicas, 5);
        const double c_n = *std::max_element(ratios.begin(), ratios.end());
        const double id_max = *std::max_element(idv.begin(), idv.end());
        c_max = std::max(c_max, c_n);
        c_min = std::min(c_min, c_n);
        ident = std::max(ident, id_max);
        b.table.add({w.n, t0_for(cfg, w), cnt.mean, meas.mean, meas.se, bl.mean, c_n, blq.mean, bll.mean, id_max,
                     coeff.mean, coeff.mean * cnt.mean});
    }
    b.summary["fitted_c"] = c_max;
    b.summary["stability"] = c_max / c_min;
    b.summary["identity_max_error"] = ident;

    auto n = b.table.column("n");
    auto bound = b.table.column("bound_mean");
    std::vector<double> cb;
    for (double v : bound) cb.push_back(c_max * v);
    PlotSpec p;
    p.name = "bl-check";
    p.title = "Unit-torus W2^2 vs Fourier bound (" + meta(cfg) + ")";
    p.xlabel = "n";
    p.ylabel = "W2^2 on the unit torus";
    p.series.push_back({"measured", n, b.table.column("measured_mean"), false});
    p.series.push_back({"c * bound", n, cb, true});
    b.plots.push_back(p);
    return b;
}

// ------------------------------------------------------- matching-moments

Built run_matching_moments(const ExperimentConfig& cfg, const std::string& dir, std::size_t* resumed) {
    const auto spec_a = process::ProcessSpec::parse(cfg.process);
    const auto spec_b = process::ProcessSpec::parse(cfg.process_b);
    const auto cost = transport::CostFn::parse(cfg.cost);
    TaskFn fn = [&](std::size_t i, int, std::uint64_t seed) {
        const geom::Window w = cfg.window(i);
        const auto a = process::sample(spec_a, w, substream(seed, 0));
        const auto b = process::sample(spec_b, w, substream(seed, 1));
        transport::MatchResult m;
        int skip = 0;
        if (cfg.matcher == "exact") {
            m = transport::exact_matching(a, b, cost);
        } else if (cfg.matcher == "stable") {
            m = transport::stable_matching(a, b);
        } else {
            transport::DyadicInfo info;
            m = transport::dyadic_matching(a, b, substream(seed, 2), &info);
            skip = info.levels + 1;
        }
        auto cdf = spectral::distance_cdf(m, a, cfg.core_fraction, skip);
        double mean = 0.0;
        for (double v : cdf.sorted) mean += v;
        mean /= static_cast<double>(cdf.size());
        TaskOut o;
        o.values = {static_cast<double>(a.size()), static_cast<double>(b.size()),
                    static_cast<double>(m.pairs.size()), bounds::weight_moment(cdf.sorted, cfg.d, cfg.gamma),
                    mean, transport::cost_of(m, cost)};
        return o;
    };
    auto outs = run_tasks(cfg, dir, fn, resumed);

    Built b;
    b.raw_columns = {"count_a", "count_b", "pairs", "weight_moment", "mean_distance", "cost"};
    b.table.columns = {"n", "pairs_mean", "weight_moment_mean", "weight_moment_se", "mean_distance",
                       "mean_distance_se", "cost_mean", "cost_se"};
    for (std::size_t i = 0; i < cfg.grid_size(); ++i) {
        const geom::Window w = cfg.window(i);
        auto pairs = spectral::mean_se(slice(outs, i, cfg.replicas, 2));
        auto wm = spectral::mean_se(slice(outs, i, cfg.replicas, 3));
        auto md = spectral::mean_se(slice(outs, i, cfg.replicas, 4));
        auto c = spectral::mean_se(slice(outs, i, cfg.replicas, 5));
        b.table.add({w.n, pairs.mean, wm.mean, wm.se, md.mean, md.se, c.mean, c.se});
    }
    auto n = b.table.column("n");
    PlotSpec p;
    p.name = "matching-moments";
    p.title = "Typical-distance weight moment (" + cfg.matcher + ", " + cfg.process + " vs " + cfg.process_b +
              ", d=" + std::to_string(cfg.d) + ")";
    p.xlabel = "n";
    p.ylabel = "mean weight";
    p.series.push_back({"weight moment", n, b.table.column("weight_moment_mean"), false});
    p.series.push_back({"mean distance", n, b.table.column("mean_distance"), true});
    b.plots.push_back(p);
    return b;
}

}  // namespace

RunRecord run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const std::string dir = cfg.out;
    fs::create_directories(fs::path(dir) / "data");
    const auto t_start = std::chrono::steady_clock::now();

    std::size_t resumed = 0;
    Built b;
    switch (cfg.experiment) {
        case Experiment::rates: b = run_rates(cfg, dir, &resumed); break;
        case Experiment::spectrum: b = run_spectrum(cfg, dir, &resumed); break;
        case Experiment::variance: b = run_variance(cfg, dir, &resumed); break;
        case Experiment::tails: b = run_tails(cfg, dir, &resumed); break;
        case Experiment::bl_check: b = run_bl_check(cfg, dir, &resumed); break;
        case Experiment::matching_moments: b = run_matching_moments(cfg, dir, &resumed); break;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    const std::string base = experiment_name(cfg.experiment);
    std::vector<std::string> files;
    const std::string main_csv = (fs::path(dir) / "data" / (base + ".csv")).string();
    b.table.write(main_csv);
    files.push_back(main_csv);
    for (const auto& [name, t] : b.extra_tables) {
        const std::string path = (fs::path(dir) / "data" / (name + ".csv")).string();
        t.write(path);
        files.push_back(path);
    }

    RunRecord rec;
    rec.directory = dir;
    json& j = rec.doc;
    j["library_version"] = version;
    j["schema"] = "hypermatch-schema v1";
    j["experiment"] = base;
    j["config_hash"] = cfg.hash();
    j["config"] = cfg.to_json();
    j["wall_clock_seconds"] = wall;
    j["resumed_tasks"] = resumed;
    j["raw_columns"] = b.raw_columns;
    j["aggregates"] = b.table.to_json();
    j["summary"] = b.summary;
    j["plots"] = json::array();
    for (const auto& p : b.plots) j["plots"].push_back(plot_to_json(p));

    // Raw measurements come back from the checkpoint in task order.
    json raw = json::array();
    {
        std::size_t tasks = cfg.grid_size() * static_cast<std::size_t>(cfg.replicas);
        auto slots = load_checkpoint((fs::path(dir) / "checkpoint.txt").string(), cfg.hash(), tasks);
        for (std::size_t t = 0; t < tasks; ++t) {
            if (!slots[t]) continue;
            json v = json::array();
            for (double x : slots[t]->values) v.push_back(std::isfinite(x) ? json(x) : json(nullptr));
            raw.push_back({{"n_index", t / cfg.replicas},
                           {"replica", t % cfg.replicas},
                           {"values", v}});
        }
    }
    j["raw"] = raw;

    if (cfg.grid_size() >= 2 || cfg.experiment == Experiment::tails ||
        cfg.experiment == Experiment::spectrum) {
        for (const auto& f : emit_plots(j, (fs::path(dir) / "plots").string())) files.push_back(f);
    }
    j["files"] = files;

    const std::string rec_path = (fs::path(dir) / "record.json").string();
    std::ofstream f(rec_path, std::ios::binary);
    if (!f) fail(ErrorKind::io, "cannot write '" + rec_path + "'");
    f << j.dump(2) << '\n';
    return rec;
}

}  // namespace hm::harness
