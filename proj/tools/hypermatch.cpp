// hypermatch: run declarative experiments, list them, re-render plots.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hypermatch/error.hpp"
#include "hypermatch/harness.hpp"

namespace fs = std::filesystem;
using namespace hm;

namespace {

constexpr int exit_config = 2;
constexpr int exit_guard = 3;
constexpr int exit_module = 4;

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::config: return exit_config;
        case ErrorKind::numerical_guard: return exit_guard;
        default: return exit_module;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hypermatch: transport and matching experiments for hyperuniform point processes"};
    app.require_subcommand(1);

    std::string config_path;
    long long seed = -1;
    int replicas = 0;
    int workers = 0;
    std::string out;
    std::vector<std::string> sets;
    bool resume = false;

    auto* run = app.add_subcommand("run", "run every experiment section of a config file");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--seed", seed, "master seed");
    run->add_option("--replicas", replicas, "replicas per grid point");
    run->add_option("--out", out, "output directory");
    run->add_option("--workers", workers, "worker threads");
    run->add_option("--set", sets, "override, key=value or section.key=value");
    run->add_flag("--resume", resume, "reuse a matching checkpoint in the output directory");

    app.add_subcommand("list-experiments", "list experiment kinds");

    std::string record_path, plot_dir;
    auto* plot = app.add_subcommand("plot", "re-render SVG plots from a record.json");
    plot->add_option("record", record_path, "record.json")->required();
    plot->add_option("--out", plot_dir, "directory for the SVG files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    try {
        if (app.got_subcommand("list-experiments")) {
            for (const auto& name : harness::experiment_names())
                std::printf("%-18s %s\n", name.c_str(),
                            harness::experiment_summary(harness::parse_experiment(name)).c_str());
            return 0;
        }

        if (app.got_subcommand("plot")) {
            std::ifstream f(record_path);
            if (!f) fail(ErrorKind::config, "cannot open record '" + record_path + "'");
            harness::json rec;
            try {
                f >> rec;
            } catch (const std::exception& e) {
                fail(ErrorKind::config, std::string("record is not valid JSON: ") + e.what());
            }
            if (plot_dir.empty())
                plot_dir = (fs::path(record_path).parent_path() / "plots").string();
            auto files = harness::emit_plots(rec, plot_dir);
            for (const auto& p : files) std::printf("%s\n", p.c_str());
            return 0;
        }

        auto cfgs = harness::load_config(config_path);
        if (seed >= 0) harness::apply_override(cfgs, "seed=" + std::to_string(seed));
        if (replicas > 0) harness::apply_override(cfgs, "replicas=" + std::to_string(replicas));
        if (workers > 0) harness::apply_override(cfgs, "workers=" + std::to_string(workers));
        if (!out.empty()) harness::apply_override(cfgs, "out=" + out);
        if (resume) harness::apply_override(cfgs, "resume=true");
        for (const auto& s : sets) harness::apply_override(cfgs, s);
        if (cfgs.size() > 1)
            for (auto& c : cfgs) c.out = (fs::path(c.out) / c.name).string();
        for (const auto& c : cfgs) harness::validate(c);

        for (const auto& c : cfgs) {
            std::fprintf(stderr, "[%s] %s, %zu grid points x %d replicas -> %s\n", c.name.c_str(),
                         harness::experiment_name(c.experiment).c_str(), c.grid_size(), c.replicas,
                         c.out.c_str());
            auto rec = harness::run_experiment(c);
            std::fprintf(stderr, "[%s] done in %.1f s, record %s\n", c.name.c_str(),
                         rec.doc["wall_clock_seconds"].get<double>(),
                         (fs::path(rec.directory) / "record.json").string().c_str());
            if (!rec.doc["summary"].empty())
                std::printf("%s %s\n", c.name.c_str(), rec.doc["summary"].dump().c_str());
        }
        return 0;
    } catch (const Error& e) {
        std::fprintf(stderr, "hypermatch: %s error: %s\n", kind_name(e.kind()), e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "hypermatch: %s\n", e.what());
        return exit_module;
    }
}
