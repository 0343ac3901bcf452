#include "tailrisk/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "tailrisk/errors.hpp"

namespace tailrisk {

using nlohmann::json;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

Eigen::VectorXd vector_of(const json& j, const char* what) {
    if (!j.is_array() || j.empty()) throw ValidationError(std::string(what) + " must be a non-empty array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ValidationError(std::string(what) + " must contain numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Eigen::MatrixXd matrix_of(const json& j, int d, const char* what) {
    if (!j.is_array() || static_cast<int>(j.size()) != d)
        throw ValidationError(std::string(what) + " must be a " + std::to_string(d) + "x" + std::to_string(d) +
                              " matrix");
    Eigen::MatrixXd m(d, d);
    for (int r = 0; r < d; ++r) {
        const Eigen::VectorXd row = vector_of(j[r], what);
        if (row.size() != d) throw ValidationError(std::string(what) + " has a row of the wrong length");
        m.row(r) = row.transpose();
    }
    return m;
}

CorrelationSetting correlation_of(const json& j, int d) {
    if (j.is_number()) {
        const double rho = j.get<double>();
        return common_rho_setting(d, rho);
    }
    CorrelationSetting s;
    s.sigma = matrix_of(j, d, "rho");
    s.label = "matrix";
    return s;
}

RadialLaw radial_of(const json& j, int d) {
    if (j.is_null()) return RadialLaw::chi_root(d);
    if (j.is_string()) {
        const std::string k = lower(j.get<std::string>());
        if (k == "chi") return RadialLaw::chi_root(d);
        throw ValidationError("radial \"" + k + "\" needs parameters; use an object");
    }
    if (!j.is_object()) throw ValidationError("radial must be an object");
    const std::string kind = lower(j.value("kind", std::string("chi")));
    if (kind == "chi") return RadialLaw::chi_root(j.value("dof", d));
    if (kind == "exp-power" || kind == "weibull")
        return RadialLaw::weibull(j.at("shape").get<double>(), j.value("scale", 1.0));
    throw ValidationError("unknown radial kind \"" + kind + "\"; valid kinds: chi, exp-power, weibull");
}

ModelSpec model_of(const json& block) {
    if (block.contains("lognormal")) {
        const json& ln = block.at("lognormal");
        LogNormalParams p;
        p.mu = vector_of(ln.at("mu"), "mu");
        p.sigma2 = vector_of(ln.at("sigma2"), "sigma2");
        if (p.mu.size() != p.sigma2.size()) throw ValidationError("mu and sigma2 differ in length");
        const int d = static_cast<int>(p.mu.size());
        const json rho = ln.value("rho", json(0.0));
        p.corr = rho.is_number() ? common_correlation(d, rho.get<double>()) : matrix_of(rho, d, "rho");
        return from_lognormal(p);
    }
    if (block.contains("raw")) {
        const json& raw = block.at("raw");
        ModelSpec m;
        m.lambda = vector_of(raw.at("lambda"), "lambda");
        m.beta = vector_of(raw.at("beta"), "beta");
        const int d = m.dim();
        if (m.beta.size() != d) throw ValidationError("lambda and beta differ in length");
        m.gamma = raw.value("gamma", 1.0);
        m.sigma = raw.contains("sigma") ? matrix_of(raw.at("sigma"), d, "sigma") : Eigen::MatrixXd::Identity(d, d);
        m.radial = radial_of(raw.contains("radial") ? raw.at("radial") : json(), d);
        validate(m);
        return m;
    }
    throw ValidationError("model block needs a \"lognormal\" or \"raw\" entry");
}

EstimatorKind estimator_of(const json& j) {
    if (j.is_string()) return parse_estimator(j.get<std::string>());
    if (j.is_object()) return parse_estimator(j.at("name").get<std::string>(), j.value("a", kDefaultIsShapeA));
    throw ValidationError("estimators must be names or {\"name\": ..., \"a\": ...} objects");
}

BTuning b_tuning_of(const std::string& s) {
    const std::string k = lower(s);
    if (k == "second-moment") return BTuning::SecondMoment;
    if (k == "log-ratio") return BTuning::LogRatio;
    if (k == "inverse-log-scale") return BTuning::InverseLogScale;
    if (k == "fixed") return BTuning::Fixed;
    throw ValidationError("unknown b_tuning \"" + s + "\"; valid: second-moment, log-ratio, inverse-log-scale, fixed");
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
}

}  // namespace

OutputFormat parse_format(const std::string& s) {
    const std::string k = lower(s);
    if (k == "csv") return OutputFormat::Csv;
    if (k == "md" || k == "markdown") return OutputFormat::Markdown;
    if (k == "txt" || k == "text") return OutputFormat::Text;
    throw ValidationError("unknown format \"" + s + "\"; valid formats: csv, md, txt");
}

int parse_threads(const std::string& s) {
    if (lower(s) == "auto") return 0;
    std::size_t pos = 0;
    int t = 0;
    try {
        t = std::stoi(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || s.empty() || t < 1) throw ValidationError("threads must be a positive integer or \"auto\"");
    return t;
}

CompareRequest RunConfig::request() const {
    CompareRequest req;
    req.model = model;
    req.correlations = correlations;
    req.thresholds = thresholds;
    req.estimators = estimators;
    req.n = n;
    req.cmc_n = cmc_n;
    req.run.seed = seed;
    req.run.threads = threads;
    req.context = context;
    return req;
}

namespace {

std::vector<CorrelationSetting> correlations_of(const json& doc, int d) {
    std::vector<CorrelationSetting> out;
    if (!doc.contains("rho")) return out;
    const json& rho = doc.at("rho");
    if (rho.is_array() && !rho.empty() && rho[0].is_array()) {
        out.push_back(correlation_of(rho, d));
    } else if (rho.is_array()) {
        for (const auto& r : rho) out.push_back(correlation_of(r, d));
    } else {
        out.push_back(correlation_of(rho, d));
    }
    for (const auto& c : out) validate_correlation(c.sigma);
    return out;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    const json doc = parse_json(json_text);
    if (!doc.is_object()) throw ValidationError("config must be a JSON object");
    try {
        RunConfig cfg;
        cfg.model = model_of(doc.at("model"));
        cfg.correlations = correlations_of(doc, cfg.model.dim());
        const json& u = doc.at("u");
        if (u.is_number()) {
            cfg.thresholds.push_back(u.get<double>());
        } else {
            const Eigen::VectorXd v = vector_of(u, "u");
            cfg.thresholds.assign(v.data(), v.data() + v.size());
        }
        for (double x : cfg.thresholds)
            if (!(x > 0.0)) throw ValidationError("u values must be positive");
        for (const auto& e : doc.at("estimators")) cfg.estimators.push_back(estimator_of(e));
        cfg.n = doc.value("n", cfg.n);
        cfg.cmc_n = doc.value("cmc_n", cfg.cmc_n);
        if (cfg.n < 2 || (cfg.cmc_n != 0 && cfg.cmc_n < 2)) throw ValidationError("n must be at least 2");
        cfg.seed = doc.value("seed", cfg.seed);
        if (doc.contains("threads")) {
            const json& t = doc.at("threads");
            cfg.threads = t.is_string() ? parse_threads(t.get<std::string>()) : parse_threads(std::to_string(t.get<int>()));
        }
        if (doc.contains("output")) {
            const json& out = doc.at("output");
            if (out.contains("format")) cfg.format = parse_format(out.at("format").get<std::string>());
            cfg.out_path = out.value("path", std::string());
        }
        if (doc.contains("b_tuning")) cfg.context.b_tuning = b_tuning_of(doc.at("b_tuning").get<std::string>());
        if (doc.contains("fixed_b")) cfg.context.fixed_b = doc.at("fixed_b").get<double>();
        return cfg;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config \"" + path + "\"");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig load_config(const std::string& path) {
    return parse_config(read_file(path));
}

std::vector<ModelSetting> parse_model_settings(const std::string& json_text) {
    const json doc = parse_json(json_text);
    try {
        const bool whole = doc.contains("model");
        const ModelSpec base = model_of(whole ? doc.at("model") : doc);
        std::vector<ModelSetting> out;
        for (const auto& c : correlations_of(doc, base.dim())) {
            ModelSetting s{c.label, base};
            s.model.sigma = c.sigma;
            out.push_back(std::move(s));
        }
        if (out.empty()) out.push_back({"model", base});
        return out;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
}

ModelSpec parse_model(const std::string& json_text) {
    const json doc = parse_json(json_text);
    try {
        return model_of(doc.contains("model") ? doc.at("model") : doc);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

void write_table(std::ostream& os, const std::vector<TableRow>& rows, OutputFormat format) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows) {
        const RunStats& s = r.stats;
        cells.push_back({r.rho_label, format_number(s.u), s.estimator.name(), std::to_string(s.n),
                         format_number(s.mean), format_number(s.per_rep_std), format_number(s.cv),
                         format_number(s.se_of_mean), std::to_string(s.failures), s.heuristic ? "heuristic" : "",
                         format_number(s.wall_time), format_number(s.time_per_5e5), format_number(s.efficiency)});
    }
    const auto& head = table_columns();
    if (format == OutputFormat::Csv) {
        for (std::size_t c = 0; c < head.size(); ++c) os << (c ? "," : "") << head[c];
        os << '\n';
        for (const auto& row : cells) {
            for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
            os << '\n';
        }
        return;
    }
    std::vector<std::size_t> width(head.size());
    for (std::size_t c = 0; c < head.size(); ++c) {
        width[c] = head[c].size();
        for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
    }
    auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
    if (format == OutputFormat::Markdown) {
        auto line = [&](const std::vector<std::string>& row) {
            os << '|';
            for (std::size_t c = 0; c < row.size(); ++c) os << ' ' << pad(row[c], width[c]) << " |";
            os << '\n';
        };
        line(head);
        os << '|';
        for (std::size_t c = 0; c < head.size(); ++c) os << std::string(width[c] + 2, '-') << '|';
        os << '\n';
        for (const auto& row : cells) line(row);
        return;
    }
    auto line = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "  " : "") << pad(row[c], width[c]);
        os << '\n';
    };
    line(head);
    for (const auto& row : cells) line(row);
}

}  // namespace tailrisk
