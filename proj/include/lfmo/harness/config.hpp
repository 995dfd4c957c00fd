#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lfmo/error.hpp"
#include "lfmo/signature.hpp"
#include "lfmo/subordinator.hpp"

namespace lfmo::harness {

inline constexpr const char* config_schema_id = "lfmo-experiment/1";

/// Configuration problem, tagged with the JSON pointer of the offending field.
class config_error : public std::runtime_error {
  public:
    config_error(std::string path, const std::string& message)
        : std::runtime_error((path.empty() ? std::string("/") : path) + ": " + message),
          path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

  private:
    std::string path_;
};

enum class ExperimentKind { pvalue_study, mean_study, reliability_curve, hypothesis_report, mttf_table };

inline const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::pvalue_study: return "pvalue-study";
        case ExperimentKind::mean_study: return "mean-study";
        case ExperimentKind::reliability_curve: return "reliability-curve";
        case ExperimentKind::hypothesis_report: return "hypothesis-report";
        case ExperimentKind::mttf_table: return "mttf-table";
    }
    return "unknown";
}

inline std::optional<ExperimentKind> parse_kind(const std::string& s) {
    for (auto k : {ExperimentKind::pvalue_study, ExperimentKind::mean_study,
                   ExperimentKind::reliability_curve, ExperimentKind::hypothesis_report,
                   ExperimentKind::mttf_table})
        if (s == to_string(k)) return k;
    return std::nullopt;
}

struct FamilyConfig {
    // powerlaw | reversed-powerlaw | binomial | kofn | series | parallel | structure | explicit
    std::string family;
    std::vector<double> params;                  // b, p or k values
    std::string structure_file;                  // structure: truth-table file
    std::string builtin;                         // structure: builtin name
    std::vector<std::vector<double>> explicit_s; // explicit: signature vectors
};

struct LimitConfig {
    std::string law;  // beta | point-mass | density-file
    double param = 0.0;
    std::string file;
};

struct PaperScale {
    static constexpr std::size_t samples_per_test = 1000;
    static constexpr std::size_t repetitions = 1000;
    static constexpr std::size_t samples = 100000;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::pvalue_study;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::string output;

    std::vector<double> drifts;
    std::vector<double> jump_rates;
    std::vector<JumpLaw> jump_laws;

    FamilyConfig signature;
    std::vector<std::size_t> n_grid;

    std::size_t samples_per_test = 500;
    std::size_t limit_samples = 0;  // 0: same as samples_per_test
    std::size_t repetitions = 50;
    std::size_t samples = 20000;

    std::vector<double> t_grid;
    std::vector<double> q_grid;
    std::optional<LimitConfig> limit;
    double tolerance = 1e-2;
    std::size_t mttf_cap = 30;
    bool paper_scale = false;

    std::size_t effective_limit_samples() const {
        return limit_samples == 0 ? samples_per_test : limit_samples;
    }
};

struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::optional<std::string> output;
    bool paper_scale = false;
};

namespace detail {

using json = nlohmann::json;

inline std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
inline std::string child(const std::string& path, std::size_t i) {
    return path + "/" + std::to_string(i);
}

inline void reject_unknown(const json& obj, const std::string& path,
                           const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.contains(key)) throw config_error(child(path, key), "unknown key");
}

inline const json& require(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) throw config_error(child(path, key), "required key is missing");
    return obj.at(key);
}

inline double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw config_error(path, "expected a number");
    return v.get<double>();
}

inline std::uint64_t as_count(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw config_error(path, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

inline std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw config_error(path, "expected a string");
    return v.get<std::string>();
}

inline std::vector<double> number_list(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw config_error(path, "expected a nonempty list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], child(path, i)));
    return out;
}

inline std::vector<std::size_t> count_list(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw config_error(path, "expected a nonempty list of integers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(static_cast<std::size_t>(as_count(v[i], child(path, i))));
    return out;
}

inline JumpLaw parse_jump_law(const json& v, const std::string& path) {
    if (!v.is_object()) throw config_error(path, "expected a jump law object");
    const std::string law = as_string(require(v, path, "law"), child(path, "law"));
    try {
        if (law == "uniform01") {
            reject_unknown(v, path, {"law"});
            return JumpLaw::uniform01();
        }
        if (law == "exponential") {
            reject_unknown(v, path, {"law", "rate"});
            return JumpLaw::exponential(as_number(require(v, path, "rate"), child(path, "rate")));
        }
        if (law == "pareto") {
            reject_unknown(v, path, {"law", "alpha", "scale"});
            const double scale = v.contains("scale") ? as_number(v["scale"], child(path, "scale")) : 1.0;
            return JumpLaw::pareto(as_number(require(v, path, "alpha"), child(path, "alpha")), scale);
        }
    } catch (const lfmo::domain_error& e) {
        throw config_error(path, e.what());
    }
    throw config_error(child(path, "law"), "unknown jump law '" + law + "'");
}

inline FamilyConfig parse_family(const json& v, const std::string& path) {
    if (!v.is_object()) throw config_error(path, "expected a signature object");
    FamilyConfig f;
    f.family = as_string(require(v, path, "family"), child(path, "family"));
    auto positive = [&](const std::string& key) {
        auto xs = number_list(require(v, path, key), child(path, key));
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (!(xs[i] > 0.0)) throw config_error(child(child(path, key), i), "must be positive");
        return xs;
    };
    if (f.family == "powerlaw" || f.family == "reversed-powerlaw") {
        reject_unknown(v, path, {"family", "b"});
        f.params = positive("b");
    } else if (f.family == "binomial") {
        reject_unknown(v, path, {"family", "p"});
        f.params = number_list(require(v, path, "p"), child(path, "p"));
        for (std::size_t i = 0; i < f.params.size(); ++i)
            if (!(f.params[i] > 0.0 && f.params[i] < 1.0))
                throw config_error(child(child(path, "p"), i), "must lie in (0, 1)");
    } else if (f.family == "kofn") {
        reject_unknown(v, path, {"family", "k"});
        for (auto k : count_list(require(v, path, "k"), child(path, "k"))) {
            if (k == 0) throw config_error(child(path, "k"), "k must be at least 1");
            f.params.push_back(static_cast<double>(k));
        }
    } else if (f.family == "series" || f.family == "parallel") {
        reject_unknown(v, path, {"family"});
    } else if (f.family == "structure") {
        reject_unknown(v, path, {"family", "file", "builtin"});
        if (v.contains("file") == v.contains("builtin"))
            throw config_error(path, "structure needs exactly one of 'file' or 'builtin'");
        if (v.contains("file")) f.structure_file = as_string(v["file"], child(path, "file"));
        else f.builtin = as_string(v["builtin"], child(path, "builtin"));
        if (!f.builtin.empty() && f.builtin != "bridge-5")
            throw config_error(child(path, "builtin"),
                               "only 'bridge-5' has a fixed size; use the series/parallel/kofn families");
    } else if (f.family == "explicit") {
        reject_unknown(v, path, {"family", "s"});
        const auto& list = require(v, path, "s");
        if (!list.is_array() || list.empty()) throw config_error(child(path, "s"), "expected a list of signatures");
        for (std::size_t i = 0; i < list.size(); ++i)
        {
            const std::string item = child(child(path, "s"), i);
            f.explicit_s.push_back(number_list(list[i], item));
            try {
                Signature check(f.explicit_s.back());
            } catch (const lfmo::domain_error& e) {
                throw config_error(item, e.what());
            }
        }
    } else {
        throw config_error(child(path, "family"), "unknown signature family '" + f.family + "'");
    }
    return f;
}

inline LimitConfig parse_limit(const json& v, const std::string& path) {
    if (!v.is_object()) throw config_error(path, "expected a limit law object");
    LimitConfig l;
    l.law = as_string(require(v, path, "law"), child(path, "law"));
    if (l.law == "beta") {
        reject_unknown(v, path, {"law", "b"});
        l.param = as_number(require(v, path, "b"), child(path, "b"));
        if (!(l.param > 0.0)) throw config_error(child(path, "b"), "must be positive");
    } else if (l.law == "point-mass") {
        reject_unknown(v, path, {"law", "p"});
        l.param = as_number(require(v, path, "p"), child(path, "p"));
        if (!(l.param > 0.0 && l.param < 1.0)) throw config_error(child(path, "p"), "must lie in (0, 1)");
    } else if (l.law == "density-file") {
        reject_unknown(v, path, {"law", "file"});
        l.file = as_string(require(v, path, "file"), child(path, "file"));
    } else {
        throw config_error(child(path, "law"), "unknown limit law '" + l.law + "'");
    }
    return l;
}

inline std::set<std::string> allowed_keys(ExperimentKind kind) {
    std::set<std::string> keys{"schema", "kind", "seed", "workers", "output", "signature", "n"};
    switch (kind) {
        case ExperimentKind::pvalue_study:
            keys.insert({"subordinator", "samples_per_test", "limit_samples", "repetitions"});
            break;
        case ExperimentKind::mean_study: keys.insert({"subordinator", "samples"}); break;
        case ExperimentKind::reliability_curve:
            keys.insert({"subordinator", "samples", "t", "limit"});
            break;
        case ExperimentKind::hypothesis_report: keys.insert({"q", "tolerance"}); break;
        case ExperimentKind::mttf_table: keys.insert({"subordinator", "samples", "mttf_cap"}); break;
    }
    return keys;
}

}  // namespace detail

/*!
 * Parses and validates an experiment description.
 *
 * `forced_kind` is the CLI subcommand; a "kind" key in the file must agree
 * with it. Overrides are applied before validation so a `--seed` flag can
 * satisfy the mandatory seed.
 */
inline ExperimentConfig parse_config(const nlohmann::json& root,
                                     std::optional<ExperimentKind> forced_kind = std::nullopt,
                                     const ConfigOverrides& overrides = {}) {
    using namespace detail;
    if (!root.is_object()) throw config_error("", "configuration must be a JSON object");
    const std::string schema = as_string(require(root, "", "schema"), "/schema");
    if (schema != config_schema_id)
        throw config_error("/schema", "unsupported schema '" + schema + "', expected '" +
                                          config_schema_id + "'");

    ExperimentConfig c;
    if (root.contains("kind")) {
        const auto kind = parse_kind(as_string(root["kind"], "/kind"));
        if (!kind) throw config_error("/kind", "unknown experiment kind");
        if (forced_kind && *forced_kind != *kind)
            throw config_error("/kind", std::string("config is for '") + to_string(*kind) +
                                            "' but subcommand is '" + to_string(*forced_kind) + "'");
        c.kind = *kind;
    } else if (forced_kind) {
        c.kind = *forced_kind;
    } else {
        throw config_error("/kind", "required key is missing");
    }
    reject_unknown(root, "", allowed_keys(c.kind));

    if (overrides.seed) c.seed = *overrides.seed;
    else if (root.contains("seed")) c.seed = as_count(root["seed"], "/seed");
    else throw config_error("/seed", "a seed is mandatory");

    if (root.contains("workers")) c.workers = static_cast<std::size_t>(as_count(root["workers"], "/workers"));
    if (overrides.workers) c.workers = *overrides.workers;
    if (c.workers == 0) throw config_error("/workers", "must be at least 1");
    if (root.contains("output")) c.output = as_string(root["output"], "/output");
    if (overrides.output) c.output = *overrides.output;

    c.signature = parse_family(require(root, "", "signature"), "/signature");
    const bool fixed_size = c.signature.family == "structure" || c.signature.family == "explicit";
    if (root.contains("n")) c.n_grid = count_list(root["n"], "/n");
    else if (!fixed_size) throw config_error("/n", "required key is missing");
    for (std::size_t i = 0; i < c.n_grid.size(); ++i)
        if (c.n_grid[i] == 0) throw config_error(child("/n", i), "n must be at least 1");

    if (c.kind != ExperimentKind::hypothesis_report) {
        const auto& sub = require(root, "", "subordinator");
        if (!sub.is_object()) throw config_error("/subordinator", "expected an object");
        reject_unknown(sub, "/subordinator", {"mu", "lambda", "jumps"});
        c.drifts = number_list(require(sub, "/subordinator", "mu"), "/subordinator/mu");
        c.jump_rates = number_list(require(sub, "/subordinator", "lambda"), "/subordinator/lambda");
        const auto& jumps = require(sub, "/subordinator", "jumps");
        if (!jumps.is_array() || jumps.empty())
            throw config_error("/subordinator/jumps", "expected a nonempty list of jump laws");
        for (std::size_t i = 0; i < jumps.size(); ++i)
            c.jump_laws.push_back(parse_jump_law(jumps[i], child("/subordinator/jumps", i)));
        for (std::size_t i = 0; i < c.drifts.size(); ++i)
            if (!(c.drifts[i] >= 0.0)) throw config_error(child("/subordinator/mu", i), "must be nonnegative");
        for (std::size_t i = 0; i < c.jump_rates.size(); ++i)
            if (!(c.jump_rates[i] >= 0.0))
                throw config_error(child("/subordinator/lambda", i), "must be nonnegative");
        for (double mu : c.drifts)
            for (double lambda : c.jump_rates)
                if (mu == 0.0 && lambda == 0.0)
                    throw config_error("/subordinator",
                                       "mu = 0 together with lambda = 0 is a degenerate subordinator");
    }

    auto read_count = [&](const char* key, std::size_t& target) {
        if (root.contains(key)) target = static_cast<std::size_t>(as_count(root[key], std::string("/") + key));
    };
    read_count("samples_per_test", c.samples_per_test);
    read_count("limit_samples", c.limit_samples);
    read_count("repetitions", c.repetitions);
    read_count("samples", c.samples);
    read_count("mttf_cap", c.mttf_cap);
    if (overrides.paper_scale) {
        c.paper_scale = true;
        c.samples_per_test = PaperScale::samples_per_test;
        c.limit_samples = PaperScale::samples_per_test;
        c.repetitions = PaperScale::repetitions;
        c.samples = PaperScale::samples;
    }

    switch (c.kind) {
        case ExperimentKind::pvalue_study:
        case ExperimentKind::mean_study:
            if (c.signature.family != "powerlaw")
                throw config_error("/signature/family", "this experiment compares against the power-law limit; family must be 'powerlaw'");
            break;
        case ExperimentKind::hypothesis_report:
            if (c.signature.family != "powerlaw" && c.signature.family != "reversed-powerlaw" &&
                c.signature.family != "binomial" && c.signature.family != "kofn")
                throw config_error("/signature/family", "hypothesis report needs an indexed family (powerlaw, reversed-powerlaw, binomial, kofn)");
            break;
        default: break;
    }
    if (c.kind == ExperimentKind::pvalue_study) {
        if (c.samples_per_test < 30) throw config_error("/samples_per_test", "KS experiments need at least 30 samples");
        if (c.effective_limit_samples() < 30) throw config_error("/limit_samples", "KS experiments need at least 30 samples");
        if (c.repetitions < 2) throw config_error("/repetitions", "need at least 2 repetitions");
    }
    if (c.kind == ExperimentKind::mean_study || c.kind == ExperimentKind::reliability_curve ||
        c.kind == ExperimentKind::mttf_table)
        if (c.samples < 2) throw config_error("/samples", "need at least 2 samples");

    if (c.kind == ExperimentKind::reliability_curve) {
        c.t_grid = number_list(require(root, "", "t"), "/t");
        for (std::size_t i = 0; i < c.t_grid.size(); ++i)
            if (!(c.t_grid[i] >= 0.0)) throw config_error(child("/t", i), "must be nonnegative");
        if (root.contains("limit")) c.limit = parse_limit(root["limit"], "/limit");
        const auto& fam = c.signature.family;
        if (!c.limit && fam != "powerlaw" && fam != "reversed-powerlaw" && fam != "binomial")
            throw config_error("/limit", "family '" + fam + "' has no built-in limit law; give one explicitly");
    }
    if (c.kind == ExperimentKind::hypothesis_report) {
        c.q_grid = number_list(require(root, "", "q"), "/q");
        for (std::size_t i = 0; i < c.q_grid.size(); ++i)
            if (!(c.q_grid[i] > 0.0 && c.q_grid[i] < 1.0)) throw config_error(child("/q", i), "must lie in (0, 1)");
        if (root.contains("tolerance")) c.tolerance = as_number(root["tolerance"], "/tolerance");
    }
    if (c.signature.family == "kofn")
        for (double k : c.signature.params)
            for (std::size_t n : c.n_grid)
                if (static_cast<std::size_t>(k) > n)
                    throw config_error("/signature/k", "k exceeds a value of the n grid");
    if (fixed_size && !c.n_grid.empty())
        throw config_error("/n", "structure and explicit signatures fix n; drop the n grid");
    return c;
}

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("", "cannot open config file '" + path + "'");
    try {
        return nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("", std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace lfmo::harness
