// tailrisk: estimate P(S > u) for sums of log-elliptical risks and compare estimators.
//
//   tailrisk run        --config cfg.json [--seed N] [--n N] [--threads N|auto] [--out PATH] [--format csv|md|txt] [--full]
//   tailrisk check      --config cfg.json --u 20000,500000 [--c 1] [--eps 1]
//   tailrisk asymptotic --config cfg.json --u 20000
//   tailrisk trend      --config cfg.json --estimator RN [--u ...] [--n N] [--seed N] [--threads N|auto]
//
// Exit codes: 0 success, 1 invalid input, 2 numerical abort.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tailrisk/config.hpp"
#include "tailrisk/diagnostics.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/harness.hpp"
#include "tailrisk/tails.hpp"

namespace {

using namespace tailrisk;

constexpr std::int64_t kFullN = 10'000'000;

std::vector<double> parse_u_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != item.size() || !(v > 0.0))
            throw ValidationError("--u expects positive numbers separated by commas, got \"" + item + "\"");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError("--u is empty");
    return out;
}

// --threads, then TAILRISK_THREADS, then the config value.
int pick_threads(const std::optional<std::string>& flag, int from_config) {
    if (flag) return parse_threads(*flag);
    if (const char* env = std::getenv("TAILRISK_THREADS"); env && *env) return parse_threads(env);
    return from_config;
}

struct Common {
    std::string config;
    std::optional<std::string> threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> n;
};

int cmd_run(const Common& c, const std::optional<std::string>& out, const std::optional<std::string>& format,
            bool full) {
    RunConfig cfg = load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (c.n) {
        if (*c.n < 2) throw ValidationError("--n must be at least 2");
        cfg.n = *c.n;
        cfg.cmc_n = 0;
    }
    if (full) cfg.n = cfg.cmc_n = kFullN;
    cfg.threads = pick_threads(c.threads, cfg.threads);
    if (format) cfg.format = parse_format(*format);
    if (out) cfg.out_path = *out;

    const auto rows = compare(cfg.request());
    if (cfg.out_path.empty()) {
        write_table(std::cout, rows, cfg.format);
    } else {
        std::ofstream os(cfg.out_path);
        if (!os) throw ValidationError("cannot write \"" + cfg.out_path + "\"");
        write_table(os, rows, cfg.format);
    }
    return 0;
}

int cmd_check(const Common& c, const std::string& u_list, double cc, double eps) {
    const auto us = parse_u_list(u_list);
    for (const auto& setting : parse_model_settings(read_file(c.config))) {
        const auto rep = check_mak_condition(setting.model, us, cc, eps);
        std::cout << "rho=" << setting.label << "  c=" << cc << "  eps=" << eps << '\n';
        std::cout << "  j  i  u           lhs          rhs          holds  i_in_J\n";
        for (const auto& p : rep.pairs) {
            std::cout << "  " << p.j + 1 << "  " << p.i + 1 << "  " << format_number(p.u) << "  "
                      << format_number(p.lhs) << "  " << format_number(p.rhs) << "  " << (p.holds ? "yes" : "no")
                      << "  " << (p.i_in_J ? "yes" : "no") << '\n';
        }
        for (const auto& e : rep.equal_slope) {
            std::cout << "  equal slope j=" << e.j + 1 << " i=" << e.i + 1 << ": max ratio " << format_number(e.max_ratio)
                      << (e.holds ? " < 1" : " >= 1") << '\n';
        }
        std::cout << "  condition, i in J only:  " << (rep.holds_on_grid_within_J ? "holds on grid" : "fails on grid")
                  << '\n';
        std::cout << "  condition, all i:        " << (rep.holds_on_grid_all_indices ? "holds on grid" : "fails on grid")
                  << '\n';
        if (!rep.equal_slope.empty())
            std::cout << "  equal-slope sufficient condition: "
                      << (rep.equal_slope_holds ? "holds on grid" : "fails on grid") << '\n';
    }
    return 0;
}

int cmd_asymptotic(const Common& c, const std::string& u_list) {
    const auto us = parse_u_list(u_list);
    std::cout << "rho,u,full,reduced,reduced_indices\n";
    for (const auto& setting : parse_model_settings(read_file(c.config))) {
        for (double u : us) {
            const auto a = asymptotic_alpha(setting.model, u);
            std::string idx;
            for (int i : a.reduced_indices) idx += (idx.empty() ? "" : " ") + std::to_string(i + 1);
            std::cout << setting.label << ',' << format_number(u) << ',' << format_number(a.full) << ','
                      << format_number(a.reduced) << ',' << idx << '\n';
        }
    }
    return 0;
}

int cmd_trend(const Common& c, const std::string& estimator, const std::optional<std::string>& u_list) {
    const std::string text = read_file(c.config);
    const auto settings = parse_model_settings(text);
    std::vector<double> us;
    std::int64_t n = 100000;
    std::uint64_t seed = 1;
    int threads = 0;
    ContextOptions ctx;
    if (u_list) {
        us = parse_u_list(*u_list);
    }
    try {
        const RunConfig cfg = parse_config(text);
        if (us.empty()) us = cfg.thresholds;
        n = cfg.n;
        seed = cfg.seed;
        threads = cfg.threads;
        ctx = cfg.context;
    } catch (const ValidationError&) {
        // A bare model file: --u is then required.
        if (us.empty()) throw;
    }
    if (c.n) n = *c.n;
    if (c.seed) seed = *c.seed;
    RunOptions opts{seed, pick_threads(c.threads, threads)};
    const EstimatorKind kind = parse_estimator(estimator);

    for (const auto& setting : settings) {
        const auto rep = variance_trend(setting.model, kind, us, n, opts, ctx);
        std::cout << "rho=" << setting.label << "  estimator=" << kind.name() << "  axis=" << rep.axis << '\n';
        std::cout << "  u,estimate,cv\n";
        for (const auto& p : rep.points)
            std::cout << "  " << format_number(p.u) << ',' << format_number(p.mean) << ',' << format_number(p.cv)
                      << '\n';
        std::cout << "  slope of log cv: " << (rep.slope ? format_number(*rep.slope) : std::string("n/a")) << '\n';
        std::cout << "  cv decreasing: " << (rep.cv_decreasing ? "yes" : "no") << '\n';
        if (!rep.grid_meets_precondition)
            std::cout << "  note: grid has fewer than 4 points or spans less than 2 decades\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tail probabilities of sums of log-elliptical risks"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "JSON config")->required();
        sub->add_option("--threads", common.threads, "worker threads, INT or auto (env TAILRISK_THREADS)");
        sub->add_option("--seed", common.seed, "master seed");
        sub->add_option("--n", common.n, "replications per estimator");
    };

    std::optional<std::string> out, format;
    bool full = false;
    auto* run = app.add_subcommand("run", "run the estimator comparison of a config");
    add_common(run);
    run->add_option("--out", out, "output path (default stdout)");
    run->add_option("--format", format, "csv, md or txt");
    run->add_flag("--full", full, "use 1e7 replications for every estimator");

    std::string u_list;
    double cc = 1.0, eps = 1.0;
    auto* check = app.add_subcommand("check", "evaluate the MAK efficiency condition on a u grid");
    add_common(check);
    check->add_option("--u", u_list, "comma separated thresholds")->required();
    check->add_option("--c", cc, "constant c > 0");
    check->add_option("--eps", eps, "constant eps > 0");

    std::string u_asym;
    auto* asym = app.add_subcommand("asymptotic", "sum of marginal tails, full and reduced");
    add_common(asym);
    asym->add_option("--u", u_asym, "comma separated thresholds")->required();

    std::optional<std::string> u_trend;
    std::string estimator = "RN";
    auto* trend = app.add_subcommand("trend", "coefficient of variation along a u grid");
    add_common(trend);
    trend->add_option("--u", u_trend, "comma separated thresholds (default: config u)");
    trend->add_option("--estimator", estimator, "estimator name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) return cmd_run(common, out, format, full);
        if (*check) return cmd_check(common, u_list, cc, eps);
        if (*asym) return cmd_asymptotic(common, u_asym);
        if (*trend) return cmd_trend(common, estimator, u_trend);
    } catch (const NumericalError& e) {
        std::cerr << "tailrisk: numerical abort: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "tailrisk: " << e.what() << '\n';
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "tailrisk: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "tailrisk: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
