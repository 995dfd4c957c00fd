#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lfmo/fraction_law.hpp"
#include "lfmo/harness/config.hpp"
#include "lfmo/harness/parallel.hpp"
#include "lfmo/harness/result_table.hpp"
#include "lfmo/random.hpp"
#include "lfmo/reliability.hpp"
#include "lfmo/signature.hpp"
#include "lfmo/stats.hpp"
#include "lfmo/subordinator.hpp"

namespace lfmo::harness {

// Samples per independently seeded block in the mean-type experiments.
inline constexpr std::size_t sample_block = 1000;

struct SubordinatorCell {
    double drift;
    double jump_rate;
    JumpLaw jumps;

    SubordinatorSpec spec() const { return {drift, jump_rate, jumps}; }
};

struct SignatureChoice {
    std::string family;
    std::string param_text;
    double param = 0.0;
    std::function<Signature(std::size_t)> make;
    std::optional<std::size_t> fixed_n;
};

struct Cell {
    std::size_t subordinator = 0;
    std::size_t choice = 0;
    std::size_t n = 0;
};

namespace detail {

inline std::uint64_t kind_stream_id(ExperimentKind kind) { return static_cast<std::uint64_t>(kind) + 1; }

inline std::vector<SubordinatorCell> subordinator_grid(const ExperimentConfig& c) {
    std::vector<SubordinatorCell> out;
    for (double mu : c.drifts)
        for (double lambda : c.jump_rates)
            for (const auto& law : c.jump_laws) out.push_back({mu, lambda, law});
    return out;
}

inline std::vector<std::string> jump_cells(const JumpLaw& law) {
    return std::visit(
        [&](const auto& j) -> std::vector<std::string> {
            using T = std::decay_t<decltype(j)>;
            if constexpr (std::is_same_v<T, uniform01_jumps>) return {law.name(), "", ""};
            else if constexpr (std::is_same_v<T, exponential_jumps>)
                return {law.name(), format_number(j.rate), ""};
            else return {law.name(), format_number(j.alpha), format_number(j.scale)};
        },
        law.variant());
}

inline std::vector<std::string> subordinator_cells(const SubordinatorCell& s) {
    std::vector<std::string> out{format_number(s.drift), format_number(s.jump_rate)};
    for (auto& cell : jump_cells(s.jumps)) out.push_back(std::move(cell));
    return out;
}

inline std::string join_numbers(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ";" : "") + format_number(xs[i]);
    return out;
}

inline std::vector<SignatureChoice> signature_choices(const FamilyConfig& f) {
    std::vector<SignatureChoice> out;
    const auto& fam = f.family;
    if (fam == "powerlaw" || fam == "reversed-powerlaw") {
        const bool reversed = fam == "reversed-powerlaw";
        for (double b : f.params)
            out.push_back({fam, format_number(b), b,
                           [b, reversed](std::size_t n) {
                               return reversed ? reversed_powerlaw_signature(n, b) : powerlaw_signature(n, b);
                           },
                           std::nullopt});
    } else if (fam == "binomial") {
        for (double p : f.params)
            out.push_back({fam, format_number(p), p,
                           [p](std::size_t n) { return binomial_signature(n, p); }, std::nullopt});
    } else if (fam == "kofn") {
        for (double kd : f.params) {
            const auto k = static_cast<std::size_t>(kd);
            out.push_back({fam, std::to_string(k), kd,
                           [k](std::size_t n) { return kofn_signature(n, k); }, std::nullopt});
        }
    } else if (fam == "series") {
        out.push_back({fam, "", 0.0, [](std::size_t n) { return kofn_signature(n, 1); }, std::nullopt});
    } else if (fam == "parallel") {
        out.push_back({fam, "", 0.0, [](std::size_t n) { return kofn_signature(n, n); }, std::nullopt});
    } else if (fam == "structure") {
        StructureFunction phi = f.builtin.empty() ? StructureFunction::load_truth_table(f.structure_file)
                                                  : StructureFunction::bridge5();
        Signature sig = signature_from_structure(phi);
        const std::size_t n = sig.size();
        out.push_back({fam, f.builtin.empty() ? f.structure_file : f.builtin, 0.0,
                       [sig](std::size_t) { return sig; }, n});
    } else if (fam == "explicit") {
        for (std::size_t i = 0; i < f.explicit_s.size(); ++i) {
            Signature sig(f.explicit_s[i]);
            const std::size_t n = sig.size();
            out.push_back({fam, join_numbers(f.explicit_s[i]), static_cast<double>(i),
                           [sig](std::size_t) { return sig; }, n});
        }
    }
    return out;
}

/// Cells in row order: subordinator, then signature parameter, then n.
inline std::vector<Cell> enumerate_cells(std::size_t subordinators,
                                         const std::vector<SignatureChoice>& choices,
                                         const std::vector<std::size_t>& n_grid) {
    std::vector<Cell> out;
    for (std::size_t s = 0; s < std::max<std::size_t>(1, subordinators); ++s)
        for (std::size_t c = 0; c < choices.size(); ++c) {
            if (choices[c].fixed_n) out.push_back({s, c, *choices[c].fixed_n});
            else
                for (std::size_t n : n_grid) out.push_back({s, c, n});
        }
    return out;
}

inline std::string config_hash(const ExperimentConfig& c, const nlohmann::json& root) {
    nlohmann::json canonical = root;
    canonical.erase("workers");
    canonical.erase("output");
    canonical["seed"] = c.seed;
    canonical["kind"] = to_string(c.kind);
    canonical["paper_scale"] = c.paper_scale;
    return hex64(fnv1a64(canonical.dump()));
}

inline ResultTable make_table(const ExperimentConfig& c, const nlohmann::json& root,
                              std::vector<std::string> columns) {
    ResultTable t;
    t.kind = to_string(c.kind);
    t.columns = std::move(columns);
    t.metadata = {{"schema", results_schema_id},
                  {"kind", t.kind},
                  {"version", tool_version},
                  {"seed", std::to_string(c.seed)},
                  {"config_hash", config_hash(c, root)},
                  {"paper_scale", c.paper_scale ? "true" : "false"}};
    return t;
}

// Running mean and sum of squared deviations, merged with Chan's update.
struct Moments {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }
    void merge(const Moments& o) {
        if (o.count == 0) return;
        const double total = static_cast<double>(count + o.count);
        const double delta = o.mean - mean;
        mean += delta * static_cast<double>(o.count) / total;
        m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / total;
        count += o.count;
    }
    double standard_error() const {
        return std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
    }
};

/// Mean of `samples` draws of `draw`, split into independently seeded blocks.
template <class Draw>
std::vector<Moments> blocked_means(const ExperimentConfig& c, std::size_t cells, std::size_t samples,
                                   Draw&& draw) {
    const std::size_t blocks = (samples + sample_block - 1) / sample_block;
    std::vector<Moments> parts(cells * blocks);
    parallel_for(parts.size(), c.workers, [&](std::size_t task) {
        const std::size_t cell = task / blocks;
        const std::size_t block = task % blocks;
        rng_t rng = make_stream(c.seed, {kind_stream_id(c.kind), cell, block});
        const std::size_t begin = block * sample_block;
        const std::size_t end = std::min(samples, begin + sample_block);
        Moments m;
        for (std::size_t i = begin; i < end; ++i) m.add(draw(cell, rng));
        parts[task] = m;
    });
    std::vector<Moments> out(cells);
    for (std::size_t cell = 0; cell < cells; ++cell)
        for (std::size_t b = 0; b < blocks; ++b) out[cell].merge(parts[cell * blocks + b]);
    return out;
}

inline std::vector<SystemModel> build_models(const std::vector<Cell>& cells,
                                             const std::vector<SubordinatorCell>& subs,
                                             const std::vector<SignatureChoice>& choices) {
    std::vector<SystemModel> models;
    models.reserve(cells.size());
    for (const auto& cell : cells)
        models.push_back({choices[cell.choice].make(cell.n), subs[cell.subordinator].spec()});
    return models;
}

inline const std::vector<std::string> subordinator_columns{"mu", "lambda", "jump_law", "jump_param",
                                                           "jump_scale"};

inline std::vector<std::string> with_prefix(std::vector<std::string> tail) {
    std::vector<std::string> cols{"kind"};
    cols.insert(cols.end(), subordinator_columns.begin(), subordinator_columns.end());
    cols.insert(cols.end(), tail.begin(), tail.end());
    return cols;
}

}  // namespace detail

/*!
 * Kolmogorov-Smirnov study of the power-law systems against Exp(psi(b)).
 *
 * Each (cell, repetition) draws S lifetimes of the n-component system and S'
 * limit exponentials from its own stream and records the KS p-value.
 */
inline ResultTable run_pvalue_study(const ExperimentConfig& c, const nlohmann::json& root = {}) {
    using namespace detail;
    const auto subs = subordinator_grid(c);
    const auto choices = signature_choices(c.signature);
    const auto cells = enumerate_cells(subs.size(), choices, c.n_grid);
    const auto models = build_models(cells, subs, choices);
    std::vector<double> psi_b(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
        psi_b[i] = laplace_exponent(models[i].subordinator, choices[cells[i].choice].param);

    const std::size_t reps = c.repetitions;
    const std::size_t system_samples = c.samples_per_test;
    const std::size_t limit_samples = c.effective_limit_samples();
    std::vector<double> pvalues(cells.size() * reps);
    parallel_for(pvalues.size(), c.workers, [&](std::size_t task) {
        const std::size_t cell = task / reps;
        const std::size_t rep = task % reps;
        rng_t rng = make_stream(c.seed, {kind_stream_id(c.kind), cell, rep});
        std::vector<double> system(system_samples);
        for (auto& x : system) x = sample_system_failure(models[cell], rng);
        std::vector<double> limit(limit_samples);
        for (auto& x : limit) x = standard_exponential(rng) / psi_b[cell];
        pvalues[task] = ks_two_sample(system, limit).p_value;
    });

    ResultTable table = make_table(c, root, with_prefix({"b", "psi_b", "n", "reps", "samples_per_test",
                                                         "limit_samples", "mean_p", "se_p", "seed"}));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto est = mean_and_se(std::span<const double>(pvalues).subspan(i * reps, reps));
        std::vector<std::string> row{table.kind};
        for (auto& s : subordinator_cells(subs[cells[i].subordinator])) row.push_back(std::move(s));
        row.insert(row.end(), {choices[cells[i].choice].param_text, format_number(psi_b[i]),
                               format_number(cells[i].n), format_number(reps),
                               format_number(system_samples), format_number(limit_samples),
                               format_number(est.mean), format_number(est.standard_error),
                               std::to_string(c.seed)});
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// Mean lifetime of the power-law systems against the limit mean 1 / psi(b).
inline ResultTable run_mean_study(const ExperimentConfig& c, const nlohmann::json& root = {}) {
    using namespace detail;
    const auto subs = subordinator_grid(c);
    const auto choices = signature_choices(c.signature);
    const auto cells = enumerate_cells(subs.size(), choices, c.n_grid);
    const auto models = build_models(cells, subs, choices);

    const auto moments = blocked_means(c, cells.size(), c.samples, [&](std::size_t cell, rng_t& rng) {
        return sample_system_failure(models[cell], rng);
    });

    ResultTable table = make_table(c, root, with_prefix({"b", "psi_b", "n", "samples", "mean", "se",
                                                         "limit_mean", "rel_error", "rel_se", "seed"}));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double psi = laplace_exponent(models[i].subordinator, choices[cells[i].choice].param);
        const double limit_mean = 1.0 / psi;
        const double se = moments[i].standard_error();
        std::vector<std::string> row{table.kind};
        for (auto& s : subordinator_cells(subs[cells[i].subordinator])) row.push_back(std::move(s));
        row.insert(row.end(), {choices[cells[i].choice].param_text, format_number(psi),
                               format_number(cells[i].n), format_number(c.samples),
                               format_number(moments[i].mean), format_number(se),
                               format_number(limit_mean),
                               format_number(relative_error(moments[i].mean, limit_mean)),
                               format_number(se * psi), std::to_string(c.seed)});
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// Finite-n reliability against the limit reliability on a time grid.
inline ResultTable run_reliability_curve(const ExperimentConfig& c, const nlohmann::json& root = {}) {
    using namespace detail;
    const auto subs = subordinator_grid(c);
    const auto choices = signature_choices(c.signature);
    const auto cells = enumerate_cells(subs.size(), choices, c.n_grid);
    const auto models = build_models(cells, subs, choices);

    std::optional<FailureFractionLaw> configured;
    std::string limit_name;
    std::string limit_param;
    if (c.limit) {
        limit_name = c.limit->law;
        if (c.limit->law == "beta") configured = FailureFractionLaw::beta(c.limit->param);
        else if (c.limit->law == "point-mass") configured = FailureFractionLaw::point(c.limit->param);
        else configured = FailureFractionLaw::tabulated(TabulatedDensity::load(c.limit->file), "density-file");
        limit_param = c.limit->law == "density-file" ? c.limit->file : format_number(c.limit->param);
    }

    const std::size_t times = c.t_grid.size();
    std::vector<ReliabilityEstimate> system(cells.size() * times);
    std::vector<ReliabilityEstimate> limit(cells.size() * times);
    parallel_for(system.size(), c.workers, [&](std::size_t task) {
        const std::size_t cell = task / times;
        const std::size_t ti = task % times;
        const double t = c.t_grid[ti];
        const auto& choice = choices[cells[cell].choice];
        rng_t sys_rng = make_stream(c.seed, {kind_stream_id(c.kind), cell, ti, 0});
        rng_t lim_rng = make_stream(c.seed, {kind_stream_id(c.kind), cell, ti, 1});
        system[task] = reliability_mc(models[cell], t, c.samples, sys_rng);
        const auto& spec = models[cell].subordinator;
        if (configured) {
            limit[task] = limit_reliability({*configured, spec}, t, c.samples, lim_rng);
        } else if (choice.family == "powerlaw") {
            limit[task] = limit_reliability({FailureFractionLaw::beta(choice.param), spec}, t, c.samples, lim_rng);
        } else if (choice.family == "binomial") {
            limit[task] = limit_reliability({FailureFractionLaw::point(choice.param), spec}, t, c.samples, lim_rng);
        } else {
            limit[task] = limit_reliability_reversed(choice.param, spec, t, c.samples, lim_rng);
        }
    });

    ResultTable table = make_table(
        c, root,
        with_prefix({"family", "param", "n", "limit_law", "limit_param", "t", "samples", "r_system",
                     "se_system", "r_limit", "se_limit", "r_limit_closed", "gap", "seed"}));
    for (std::size_t cell = 0; cell < cells.size(); ++cell) {
        const auto& choice = choices[cells[cell].choice];
        std::string law = limit_name;
        std::string param = limit_param;
        if (!c.limit) {
            law = choice.family == "powerlaw" ? "beta" : choice.family == "binomial" ? "point-mass" : "reversed-beta";
            param = choice.param_text;
        }
        for (std::size_t ti = 0; ti < times; ++ti) {
            const auto& sys = system[cell * times + ti];
            const auto& lim = limit[cell * times + ti];
            const double reference = lim.closed_form.value_or(lim.estimate);
            std::vector<std::string> row{table.kind};
            for (auto& s : subordinator_cells(subs[cells[cell].subordinator])) row.push_back(std::move(s));
            row.insert(row.end(),
                       {choice.family, choice.param_text, format_number(cells[cell].n), law, param,
                        format_number(c.t_grid[ti]), format_number(c.samples), format_number(sys.estimate),
                        format_number(sys.standard_error), format_number(lim.estimate),
                        format_number(lim.standard_error),
                        lim.closed_form ? format_number(*lim.closed_form) : std::string{},
                        format_number(std::abs(sys.estimate - reference)), std::to_string(c.seed)});
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

/// B statistic per n and scaled weights n s_{ceil(nq)} per (n, q); deterministic.
inline ResultTable run_hypothesis_report(const ExperimentConfig& c, const nlohmann::json& root = {}) {
    using namespace detail;
    ResultTable table;
    table.kind = to_string(c.kind);
    table.columns = {"kind", "family", "param", "n", "q", "b_statistic", "scaled_weight", "density",
                     "abs_gap", "classification"};
    table.metadata = make_table(c, root, {}).metadata;

    std::vector<SignatureFamily> families;
    std::string classification;
    const auto& fam = c.signature.family;
    for (double p : c.signature.params) {
        if (fam == "powerlaw") families.push_back(powerlaw_family(p));
        else if (fam == "reversed-powerlaw") families.push_back(reversed_powerlaw_family(p));
        else if (fam == "binomial") families.push_back(binomial_family(p));
        else families.push_back(kofn_family(static_cast<std::size_t>(p)));
    }
    if (fam == "binomial") classification = "A-B-hold;C-D-fail";
    else if (fam == "kofn") classification = "A-holds;B-fails";
    else classification = "A-B-C-D-hold";

    std::vector<ScaledWeightReport> reports(families.size());
    std::vector<std::vector<double>> bstats(families.size(), std::vector<double>(c.n_grid.size()));
    parallel_for(families.size(), c.workers, [&](std::size_t f) {
        reports[f] = hypothesis_cd_check(families[f], c.q_grid, c.n_grid, c.tolerance);
        for (std::size_t j = 0; j < c.n_grid.size(); ++j)
            bstats[f][j] = hypothesis_b_statistic(families[f].make(c.n_grid[j]));
    });

    for (std::size_t f = 0; f < families.size(); ++f) {
        const std::string param = fam == "kofn" ? std::to_string(static_cast<std::size_t>(families[f].parameter))
                                                : format_number(families[f].parameter);
        for (std::size_t j = 0; j < c.n_grid.size(); ++j)
            for (const auto& row : reports[f].rows) {
                const double scaled = row.scaled[j];
                table.rows.push_back(
                    {table.kind, fam, param, format_number(c.n_grid[j]), format_number(row.q),
                     format_number(bstats[f][j]), format_number(scaled),
                     row.density ? format_number(*row.density) : std::string{},
                     row.density ? format_number(std::abs(scaled - *row.density)) : std::string{},
                     classification});
            }
    }
    return table;
}

/// Exact MTTF next to a Monte Carlo mean, with the z-score of the gap.
inline ResultTable run_mttf_table(const ExperimentConfig& c, const nlohmann::json& root = {}) {
    using namespace detail;
    const auto subs = subordinator_grid(c);
    const auto choices = signature_choices(c.signature);
    const auto cells = enumerate_cells(subs.size(), choices, c.n_grid);
    const auto models = build_models(cells, subs, choices);

    const auto moments = blocked_means(c, cells.size(), c.samples, [&](std::size_t cell, rng_t& rng) {
        return sample_system_failure(models[cell], rng);
    });

    ResultTable table = make_table(c, root, with_prefix({"family", "param", "n", "samples", "mttf_exact",
                                                         "mc_mean", "mc_se", "z", "status", "seed"}));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        std::string exact_cell;
        std::string z_cell;
        std::string status = "ok";
        const double se = moments[i].standard_error();
        try {
            const double exact = mttf_exact(models[i], c.mttf_cap);
            exact_cell = format_number(exact);
            z_cell = format_number((moments[i].mean - exact) / se);
        } catch (const capacity_error&) {
            status = "mc-only";
        } catch (const degenerate_model_error&) {
            status = "cancellation";
        }
        const auto& choice = choices[cells[i].choice];
        std::vector<std::string> row{table.kind};
        for (auto& s : subordinator_cells(subs[cells[i].subordinator])) row.push_back(std::move(s));
        row.insert(row.end(), {choice.family, choice.param_text, format_number(cells[i].n),
                               format_number(c.samples), exact_cell, format_number(moments[i].mean),
                               format_number(se), z_cell, status, std::to_string(c.seed)});
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline ResultTable run_experiment(const ExperimentConfig& c, const nlohmann::json& root = {}) {
    switch (c.kind) {
        case ExperimentKind::pvalue_study: return run_pvalue_study(c, root);
        case ExperimentKind::mean_study: return run_mean_study(c, root);
        case ExperimentKind::reliability_curve: return run_reliability_curve(c, root);
        case ExperimentKind::hypothesis_report: return run_hypothesis_report(c, root);
        case ExperimentKind::mttf_table: return run_mttf_table(c, root);
    }
    return {};
}

}  // namespace lfmo::harness
