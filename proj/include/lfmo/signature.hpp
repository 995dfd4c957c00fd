#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lfmo/error.hpp"
#include "lfmo/numeric.hpp"
#include "lfmo/random.hpp"

namespace lfmo {

inline constexpr std::size_t max_structure_components = 25;

// ---------------------------------------------------------------------------
// Structure functions
// ---------------------------------------------------------------------------

/*!
 * Deterministic boolean function of the component states.
 *
 * A configuration is a bit mask: bit i set means component i + 1 works.
 * Evaluators are arbitrary callables, so builtins never materialize a table.
 */
class StructureFunction {
  public:
    using config_t = std::uint32_t;
    using evaluator_t = std::function<bool(config_t)>;

    StructureFunction(std::size_t n, evaluator_t eval, std::string name = "custom")
        : n_(n), eval_(std::move(eval)), name_(std::move(name)) {
        if (n_ == 0) throw domain_error("structure function needs at least one component");
        if (n_ > 31) throw capacity_error("structure functions are limited to 31 components");
    }

    static StructureFunction from_truth_table(std::size_t n, std::vector<std::uint8_t> table) {
        if (n == 0 || n > 31) throw domain_error("truth table size out of range");
        if (table.size() != (std::size_t{1} << n))
            throw validation_error("truth table must have 2^n entries");
        auto shared = std::make_shared<const std::vector<std::uint8_t>>(std::move(table));
        return {n, [shared](config_t x) { return (*shared)[x] != 0; }, "truth-table"};
    }

    /// Fails as soon as any component fails.
    static StructureFunction series(std::size_t n) {
        const config_t all = full_mask(n);
        return {n, [all](config_t x) { return x == all; }, "series"};
    }

    static StructureFunction parallel(std::size_t n) {
        return {n, [](config_t x) { return x != 0; }, "parallel"};
    }

    /// k-out-of-n:F, i.e. fails at the k-th component failure.
    static StructureFunction k_out_of_n(std::size_t n, std::size_t k) {
        if (k < 1 || k > n) throw domain_error("k-out-of-n needs 1 <= k <= n");
        const auto failed_limit = static_cast<int>(k);
        const auto size = static_cast<int>(n);
        return {n,
                [failed_limit, size](config_t x) { return size - std::popcount(x) < failed_limit; },
                "k-out-of-n"};
    }

    /// Two-terminal bridge: edges 1 (s-a), 2 (s-b), 3 (a-b), 4 (a-t), 5 (b-t).
    static StructureFunction bridge5() {
        return {5,
                [](config_t x) {
                    auto up = [x](int c) { return (x >> (c - 1)) & 1u; };
                    return (up(1) && up(4)) || (up(2) && up(5)) || (up(1) && up(3) && up(5)) ||
                           (up(2) && up(3) && up(4));
                },
                "bridge-5"};
    }

    static StructureFunction builtin(const std::string& name, std::size_t n, std::size_t k = 1) {
        if (name == "series") return series(n);
        if (name == "parallel") return parallel(n);
        if (name == "k-out-of-n") return k_out_of_n(n, k);
        if (name == "bridge-5") return bridge5();
        throw validation_error("unknown builtin structure '" + name + "'");
    }

    /// Reads "n" followed by one "bitstring value" line per configuration;
    /// character i of the bitstring is the state of component i + 1.
    static StructureFunction read_truth_table(std::istream& in) {
        std::size_t n = 0;
        if (!(in >> n) || n == 0 || n > max_structure_components)
            throw validation_error("truth table: first line must be n in [1, 25]");
        const std::size_t count = std::size_t{1} << n;
        std::vector<std::uint8_t> table(count, 0);
        std::vector<bool> seen(count, false);
        std::string bits;
        int value = 0;
        std::size_t line = 1;
        while (in >> bits) {
            ++line;
            if (!(in >> value) || (value != 0 && value != 1))
                throw validation_error("truth table line " + std::to_string(line) +
                                       ": value must be 0 or 1");
            if (bits.size() != n)
                throw validation_error("truth table line " + std::to_string(line) +
                                       ": bitstring must have n characters");
            config_t x = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (bits[i] == '1') x |= config_t{1} << i;
                else if (bits[i] != '0')
                    throw validation_error("truth table line " + std::to_string(line) +
                                           ": bitstring must contain only 0 and 1");
            }
            if (seen[x])
                throw validation_error("truth table: duplicate configuration " + bits);
            seen[x] = true;
            table[x] = static_cast<std::uint8_t>(value);
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end())
            throw validation_error("truth table: all 2^n configurations must be listed");
        return from_truth_table(n, std::move(table));
    }

    static StructureFunction load_truth_table(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw validation_error("cannot open truth table file '" + path + "'");
        return read_truth_table(in);
    }

    std::size_t size() const noexcept { return n_; }
    const std::string& name() const noexcept { return name_; }
    bool operator()(config_t x) const { return eval_(x); }

    /// First (x, x with one more working component) pair with Phi decreasing.
    std::optional<std::pair<config_t, config_t>> find_monotonicity_violation() const {
        require_enumerable();
        const config_t count = config_t{1} << n_;
        for (config_t x = 0; x < count; ++x) {
            if (!eval_(x)) continue;
            for (std::size_t i = 0; i < n_; ++i) {
                const config_t bit = config_t{1} << i;
                if (x & bit) continue;
                // x works, so x with component i repaired must work too
                if (!eval_(x | bit)) return std::pair{x, x | bit};
            }
        }
        return std::nullopt;
    }

    void check_monotone() const {
        if (auto bad = find_monotonicity_violation()) {
            throw validation_error("structure function '" + name_ + "' is not monotone: Phi(" +
                                   bitstring(bad->first) + ") = 1 but Phi(" +
                                   bitstring(bad->second) + ") = 0");
        }
    }

    /// 1-based indices of components that never change the output.
    std::vector<std::size_t> irrelevant_components() const {
        require_enumerable();
        std::vector<std::size_t> out;
        const config_t count = config_t{1} << n_;
        for (std::size_t i = 0; i < n_; ++i) {
            const config_t bit = config_t{1} << i;
            bool relevant = false;
            for (config_t x = 0; x < count && !relevant; ++x)
                if (!(x & bit) && eval_(x) != eval_(x | bit)) relevant = true;
            if (!relevant) out.push_back(i + 1);
        }
        return out;
    }

    bool is_coherent() const {
        return !find_monotonicity_violation() && irrelevant_components().empty();
    }

    std::string bitstring(config_t x) const {
        std::string s(n_, '0');
        for (std::size_t i = 0; i < n_; ++i)
            if (x & (config_t{1} << i)) s[i] = '1';
        return s;
    }

  private:
    static config_t full_mask(std::size_t n) {
        if (n == 0 || n > 31) throw domain_error("structure function size out of range");
        return static_cast<config_t>((std::uint64_t{1} << n) - 1);
    }

    void require_enumerable() const {
        if (n_ > max_structure_components)
            throw capacity_error("exhaustive enumeration is limited to 25 components");
    }

    std::size_t n_;
    evaluator_t eval_;
    std::string name_;
};

// ---------------------------------------------------------------------------
// Signatures
// ---------------------------------------------------------------------------

inline constexpr double signature_sum_tolerance = 1e-12;

/// Probability vector (s_1, ..., s_n); s_k = P(system dies at the k-th failure).
class Signature {
  public:
    explicit Signature(std::vector<double> s) : s_(std::move(s)) {
        if (s_.empty()) throw domain_error("signature needs n >= 1");
        for (double v : s_)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw domain_error("signature entries must be finite and nonnegative");
        cdf_.resize(s_.size());
        compensated_sum acc;
        for (std::size_t k = 0; k < s_.size(); ++k) {
            acc.add(s_[k]);
            cdf_[k] = acc.value();
        }
        if (std::abs(cdf_.back() - 1.0) > signature_sum_tolerance)
            throw domain_error("signature entries must sum to 1");
    }

    std::size_t size() const noexcept { return s_.size(); }
    std::span<const double> values() const noexcept { return s_; }
    /// s_k, 1-based.
    double weight(std::size_t k) const {
        if (k < 1 || k > s_.size()) throw domain_error("signature index out of range");
        return s_[k - 1];
    }
    /// P(K <= k) for k = 1..n.
    std::span<const double> cumulative() const noexcept { return cdf_; }

    /// phi_0, ..., phi_n with s_k = phi_{n-k+1} - phi_{n-k}.
    std::vector<double> phi() const {
        const std::size_t n = s_.size();
        std::vector<double> out(n + 1, 0.0);
        compensated_sum acc;
        for (std::size_t j = 1; j <= n; ++j) {
            acc.add(s_[n - j]);  // s_{n-j+1}
            out[j] = acc.value();
        }
        out[n] = 1.0;
        return out;
    }

    Signature reversed() const { return Signature(std::vector<double>(s_.rbegin(), s_.rend())); }

    friend bool operator==(const Signature& a, const Signature& b) { return a.s_ == b.s_; }

  private:
    std::vector<double> s_;
    std::vector<double> cdf_;
};

namespace detail {

inline Signature normalized_signature(std::vector<double> w) {
    const double total = accurate_sum(w);
    if (!(total > 0.0) || !std::isfinite(total))
        throw domain_error("signature weights must have a positive finite sum");
    for (auto& v : w) v /= total;
    return Signature(std::move(w));
}

}  // namespace detail

/// Exhaustive enumeration of all 2^n configurations.
inline Signature signature_from_structure(const StructureFunction& phi) {
    const std::size_t n = phi.size();
    if (n > max_structure_components)
        throw capacity_error("signature_from_structure is limited to 25 components");
    phi.check_monotone();
    std::vector<double> working(n + 1, 0.0);  // by number of working components
    const std::uint32_t count = std::uint32_t{1} << n;
    for (std::uint32_t x = 0; x < count; ++x)
        if (phi(x)) working[static_cast<std::size_t>(std::popcount(x))] += 1.0;
    std::vector<double> frac(n + 1);
    std::uint64_t choose = 1;  // C(n, j), exact for n <= 25
    for (std::size_t j = 0; j <= n; ++j) {
        frac[j] = working[j] / static_cast<double>(choose);
        choose = choose * (n - j) / (j + 1);
    }
    if (working[0] != 0.0 || working[n] != 1.0)
        throw validation_error("structure function '" + phi.name() +
                               "' must fail with all components down and work with all up");
    std::vector<double> s(n);
    for (std::size_t k = 1; k <= n; ++k) s[k - 1] = frac[n - k + 1] - frac[n - k];
    return Signature(std::move(s));
}

inline Signature kofn_signature(std::size_t n, std::size_t k) {
    if (n == 0 || k < 1 || k > n) throw domain_error("k-out-of-n signature needs 1 <= k <= n");
    std::vector<double> s(n, 0.0);
    s[k - 1] = 1.0;
    return Signature(std::move(s));
}

/// s_k proportional to (n - k + 1)^{b - 1}.
inline Signature powerlaw_signature(std::size_t n, double b) {
    if (n == 0) throw domain_error("power-law signature needs n >= 1");
    if (!(b > 0.0) || !std::isfinite(b)) throw domain_error("power-law exponent b must be positive");
    std::vector<double> w(n);
    for (std::size_t k = 1; k <= n; ++k) w[k - 1] = std::pow(static_cast<double>(n - k + 1), b - 1.0);
    return detail::normalized_signature(std::move(w));
}

/// s_k proportional to k^{b - 1}.
inline Signature reversed_powerlaw_signature(std::size_t n, double b) {
    return powerlaw_signature(n, b).reversed();
}

/// Binomial(n - 1, p) shifted to {1, ..., n}; weights by ratio recurrence from the mode.
inline Signature binomial_signature(std::size_t n, double p) {
    if (n == 0) throw domain_error("binomial signature needs n >= 1");
    if (!(p > 0.0 && p < 1.0)) throw domain_error("binomial signature needs p in (0, 1)");
    const std::size_t m = n - 1;  // trials
    std::vector<double> w(n, 0.0);
    const auto mode = std::min(m, static_cast<std::size_t>(std::floor(static_cast<double>(n) * p)));
    const double odds = p / (1.0 - p);
    w[mode] = 1.0;
    for (std::size_t j = mode; j < m; ++j)
        w[j + 1] = w[j] * (static_cast<double>(m - j) / static_cast<double>(j + 1)) * odds;
    for (std::size_t j = mode; j > 0; --j)
        w[j - 1] = w[j] * (static_cast<double>(j) / static_cast<double>(m - j + 1)) / odds;
    return detail::normalized_signature(std::move(w));
}

/// C^{(n)} n^b / b with C^{(n)} = 1 / sum_{i=1}^n i^{b-1}; tends to 1.
inline double normalization_asymptotics(std::size_t n, double b) {
    if (n == 0) throw domain_error("normalization asymptotics needs n >= 1");
    if (!(b > 0.0) || !std::isfinite(b)) throw domain_error("b must be positive");
    if (b == 1.0) return 1.0;
    compensated_sum acc;
    for (std::size_t i = 1; i <= n; ++i) acc.add(std::pow(static_cast<double>(i), b - 1.0));
    return std::pow(static_cast<double>(n), b) / (b * acc.value());
}

/// Sandwich for normalization_asymptotics from comparing the sum with
/// integrals of x^{b-1} over [0, n], [1, n + 1] and [1, n].
inline std::pair<double, double> normalization_bounds(std::size_t n, double b) {
    if (n < 2) throw domain_error("normalization bounds need n >= 2");
    if (!(b > 0.0)) throw domain_error("b must be positive");
    const double nd = static_cast<double>(n);
    const double nb = std::pow(nd, b);
    const double upper_sum_ratio = nb / (std::pow(nd + 1.0, b) - 1.0);
    if (b == 1.0) return {1.0, 1.0};
    if (b > 1.0) return {upper_sum_ratio, 1.0};
    return {nb / (b + nb - 1.0), upper_sum_ratio};
}

/// (1 / sqrt(n)) E[1 / sqrt(Q_n (1 - Q_n))] with Q_n = K / (n + 1).
inline double hypothesis_b_statistic(const Signature& sig) {
    const std::size_t n = sig.size();
    const double denom = static_cast<double>(n) + 1.0;
    compensated_sum acc;
    for (std::size_t k = 1; k <= n; ++k) {
        const double s = sig.weight(k);
        if (s == 0.0) continue;
        const double q = static_cast<double>(k) / denom;
        acc.add(s / std::sqrt(q * (1.0 - q)));
    }
    return acc.value() / std::sqrt(static_cast<double>(n));
}

/// ceil(n q) clamped to [1, n], robust to q n landing a hair above an integer.
inline std::size_t scaled_index(std::size_t n, double q) {
    const double nq = static_cast<double>(n) * q;
    const double nearest = std::round(nq);
    double k = std::abs(nq - nearest) <= 1e-9 * std::max(1.0, nq) ? nearest : std::ceil(nq);
    k = std::clamp(k, 1.0, static_cast<double>(n));
    return static_cast<std::size_t>(k);
}

// ---------------------------------------------------------------------------
// Indexed families and the pointwise / domination diagnostic
// ---------------------------------------------------------------------------

struct SignatureFamily {
    std::string name;
    double parameter = 0.0;
    std::function<Signature(std::size_t)> make;
    /// Limiting density of Q_n, when the family has one.
    std::function<double(double)> density;
    /// Single weight s^{(n)}_k without building the full vector, when cheap.
    std::function<double(std::size_t, std::size_t)> weight;
};

inline SignatureFamily powerlaw_family(double b) {
    if (!(b > 0.0)) throw domain_error("power-law exponent b must be positive");
    return {"powerlaw", b, [b](std::size_t n) { return powerlaw_signature(n, b); },
            [b](double q) { return b * std::pow(1.0 - q, b - 1.0); }, nullptr};
}

inline SignatureFamily reversed_powerlaw_family(double b) {
    if (!(b > 0.0)) throw domain_error("power-law exponent b must be positive");
    return {"reversed-powerlaw", b, [b](std::size_t n) { return reversed_powerlaw_signature(n, b); },
            [b](double q) { return b * std::pow(q, b - 1.0); }, nullptr};
}

inline SignatureFamily binomial_family(double p) {
    if (!(p > 0.0 && p < 1.0)) throw domain_error("binomial signature needs p in (0, 1)");
    return {"binomial", p, [p](std::size_t n) { return binomial_signature(n, p); }, nullptr,
            nullptr};
}

inline SignatureFamily kofn_family(std::size_t k) {
    if (k < 1) throw domain_error("k-out-of-n needs k >= 1");
    return {"kofn", static_cast<double>(k), [k](std::size_t n) { return kofn_signature(n, k); },
            nullptr, nullptr};
}

struct ScaledWeightRow {
    double q = 0.0;
    std::vector<double> scaled;      // n s^{(n)}_{ceil(n q)} along the n grid
    std::optional<double> density;   // f(q) when known
    double sup = 0.0;                // max over the grid (domination proxy)
    bool converged = false;          // |scaled at largest n - f(q)| <= tol
};

struct ScaledWeightReport {
    std::string family;
    double parameter = 0.0;
    std::vector<std::size_t> n_grid;
    double tolerance = 0.0;
    std::vector<ScaledWeightRow> rows;
};

inline ScaledWeightReport hypothesis_cd_check(const SignatureFamily& family,
                                              std::span<const double> q_grid,
                                              std::span<const std::size_t> n_grid,
                                              double tolerance = 1e-2) {
    if (q_grid.empty() || n_grid.empty()) throw domain_error("q and n grids must be nonempty");
    ScaledWeightReport report{family.name, family.parameter, {n_grid.begin(), n_grid.end()},
                              tolerance, {}};
    for (double q : q_grid) {
        if (!(q > 0.0 && q < 1.0)) throw domain_error("q grid values must lie in (0, 1)");
        ScaledWeightRow row;
        row.q = q;
        if (family.density) row.density = family.density(q);
        report.rows.push_back(std::move(row));
    }
    for (std::size_t n : n_grid) {
        const Signature sig = family.make(n);
        for (auto& row : report.rows)
            row.scaled.push_back(static_cast<double>(n) * sig.weight(scaled_index(n, row.q)));
    }
    for (auto& row : report.rows) {
        row.sup = *std::max_element(row.scaled.begin(), row.scaled.end());
        row.converged = row.density && std::abs(row.scaled.back() - *row.density) <= tolerance;
    }
    return report;
}

/// K_b = sup_n C^{(n)} n^b, estimated over n = 1..n_max (the sequence is monotone in n,
/// with limit b).
inline double powerlaw_normalization_sup(double b, std::size_t n_max) {
    if (!(b > 0.0)) throw domain_error("b must be positive");
    double sup = std::max(1.0, b);
    compensated_sum acc;
    for (std::size_t n = 1; n <= n_max; ++n) {
        acc.add(std::pow(static_cast<double>(n), b - 1.0));
        sup = std::max(sup, std::pow(static_cast<double>(n), b) / acc.value());
    }
    return sup;
}

/// Envelope g(q) dominating n s^{(n)}_{ceil(nq)} for the power-law family.
inline double powerlaw_domination_envelope(double b, double q, double k_b) {
    if (b < 1.0) return k_b * std::pow(1.0 - q, b - 1.0);
    if (b == 1.0) return 1.0;
    return k_b * b * std::pow(2.0 - q, b - 1.0);
}

// ---------------------------------------------------------------------------
// Sampling failure ranks
// ---------------------------------------------------------------------------

/// Inverse-CDF draw of K with P(K = k) = s_k (binary search on the cumulative vector).
inline std::size_t sample_failure_index(const Signature& sig, rng_t& rng) {
    const auto cdf = sig.cumulative();
    const double u = std::generate_canonical<double, 64>(rng) * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    return idx + 1;
}

}  // namespace lfmo
