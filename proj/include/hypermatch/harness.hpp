#pragma once

// Experiment orchestration: declarative configs, seeded replica sweeps over a
// worker pool, ordered aggregation, CSV/JSON records and SVG plots.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypermatch/geometry.hpp"

namespace hm::harness {

using json = nlohmann::json;

inline constexpr const char* version = "1.0.0";
inline constexpr const char* schema_line = "# hypermatch-schema v1";

enum class Experiment { rates, spectrum, variance, tails, bl_check, matching_moments };

const std::vector<std::string>& experiment_names();
Experiment parse_experiment(const std::string& name);
std::string experiment_name(Experiment e);
std::string experiment_summary(Experiment e);

struct ExperimentConfig {
    std::string name = "run";
    Experiment experiment = Experiment::rates;
    std::string process = "poisson";
    std::string process_b = "poisson";  // second process for tails / matching-moments
    std::string model;                  // rpcm model; derived from process when empty
    int d = 2;
    // Window grid, ascending. Values are volume parameters n, expected counts
    // or side lengths according to grid_kind.
    enum class GridKind { volume, count, side };
    GridKind grid_kind = GridKind::volume;
    std::vector<double> grid;
    int replicas = 200;
    std::uint64_t seed = 1;
    double p = 2.0;
    double gamma = 2.0;
    double q_gamma = 2.0;
    double t0 = 0.0;  // 0 → c0 · n^{1/d}
    double c0 = 1.0;
    int grid_per_point = 4;
    double core_fraction = 0.25;
    int max_modes = 0;
    double sinkhorn_cutoff = 0.0;  // expected count above which Sinkhorn is used; 0 = never
    double sinkhorn_lambda = 0.05;  // × (mean nearest-neighbour spacing)²
    int sinkhorn_iterations = 20000;
    std::string cost = "power:1";
    std::string matcher = "dyadic";
    std::string out = "out";
    int workers = 1;
    bool resume = false;

    geom::Window window(std::size_t i) const;
    std::size_t grid_size() const { return grid.size(); }

    std::string canonical() const;  // stable text used for hashing
    std::string hash() const;
    json to_json() const;
};

// Parses `key = value` lines grouped in `[section]` blocks. Keys before the
// first section are defaults for every section. Each section is one experiment;
// its kind comes from `experiment =` or from the section name.
std::vector<ExperimentConfig> parse_config_text(const std::string& text);
std::vector<ExperimentConfig> load_config(const std::string& path);
// `key=value` or `section.key=value`.
void apply_override(std::vector<ExperimentConfig>& cfgs, const std::string& assignment);
void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);
void validate(const ExperimentConfig& cfg);

struct RunRecord {
    json doc;
    std::string directory;
};

RunRecord run_experiment(const ExperimentConfig& cfg);

// Writes plots/<name>.svg for every plot stored in the record.
std::vector<std::string> emit_plots(const json& record, const std::string& directory);

// %.17g; non-finite values print as nan / inf / -inf.
std::string fmt(double v);

// Rectangular numeric table written as a versioned CSV.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row);
    std::string csv() const;
    void write(const std::string& path) const;
    json to_json() const;
    std::vector<double> column(const std::string& name) const;
};

// Reads a CSV produced by Table::csv (schema line required).
Table read_table(const std::string& path);

struct Series {
    std::string label;
    std::vector<double> x, y;
    bool dashed = false;
};

struct PlotSpec {
    std::string name;
    std::string title;
    std::string xlabel, ylabel;
    bool logx = true, logy = true;
    std::vector<Series> series;
};

std::string render_svg(const PlotSpec& plot);
json plot_to_json(const PlotSpec& plot);
PlotSpec plot_from_json(const json& j);

}  // namespace hm::harness
