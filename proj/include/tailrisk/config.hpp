#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tailrisk/harness.hpp"
#include "tailrisk/model.hpp"

namespace tailrisk {

enum class OutputFormat { Csv, Markdown, Text };

OutputFormat parse_format(const std::string& s);

// A comparison run as described by a JSON document:
//
//   {
//     "model": {"lognormal": {"mu": [...], "sigma2": [...], "rho": 0.4}}
//            | {"raw": {"lambda": [...], "beta": [...], "gamma": 1, "sigma": [[...]],
//                       "radial": {"kind": "chi", "dof": 10}}},
//     "rho": [0, 0.4, [[1, 0.2], [0.2, 1]]],
//     "u": [20000, 40000],
//     "estimators": ["RN", "MAK", {"name": "RN", "a": 5}, "CMC"],
//     "n": 100000, "cmc_n": 1000000, "seed": 7, "threads": "auto",
//     "output": {"format": "csv", "path": "out.csv"}
//   }
//
// "rho" overrides the model's own correlation; omit it to use the model as is.
struct RunConfig {
    ModelSpec model;
    std::vector<CorrelationSetting> correlations;
    std::vector<double> thresholds;
    std::vector<EstimatorKind> estimators;
    std::int64_t n = 100000;
    std::int64_t cmc_n = 0;
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = auto
    OutputFormat format = OutputFormat::Csv;
    std::string out_path;
    ContextOptions context;

    CompareRequest request() const;
};

// Throws ValidationError on malformed or invalid input.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
// Only the "model" block; accepts a whole config or the bare model object.
ModelSpec parse_model(const std::string& json_text);

// The model with each "rho" override applied (the model itself when there is
// no "rho" entry). Only "model" and "rho" are read.
struct ModelSetting {
    std::string label;
    ModelSpec model;
};
std::vector<ModelSetting> parse_model_settings(const std::string& json_text);
std::string read_file(const std::string& path);

// Parses "INT" or "auto" (0).
int parse_threads(const std::string& s);

// CSV columns: rho,u,method,n,estimate,per_rep_std,cv,se_of_mean,failures,note
// followed by the timing columns wall_s,time_per_5e5_s,efficiency. Everything
// before the timing columns is a deterministic function of config and seed.
void write_table(std::ostream& os, const std::vector<TableRow>& rows, OutputFormat format);

inline const std::vector<std::string>& table_columns() {
    static const std::vector<std::string> cols = {"rho",        "u",       "method", "n",      "estimate",
                                                  "per_rep_std", "cv",      "se_of_mean", "failures", "note",
                                                  "wall_s",     "time_per_5e5_s", "efficiency"};
    return cols;
}
inline constexpr int kTimingColumns = 3;

// Shortest round-trip-stable decimal used in every table cell.
std::string format_number(double x);

}  // namespace tailrisk
