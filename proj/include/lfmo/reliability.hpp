#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "lfmo/error.hpp"
#include "lfmo/failure_times.hpp"
#include "lfmo/fraction_law.hpp"
#include "lfmo/numeric.hpp"
#include "lfmo/random.hpp"
#include "lfmo/signature.hpp"
#include "lfmo/stats.hpp"
#include "lfmo/subordinator.hpp"

namespace lfmo {

/// Mixed coherent system with LFMO component lifetimes.
struct SystemModel {
    Signature signature;
    SubordinatorSpec subordinator;

    std::size_t size() const noexcept { return signature.size(); }
};

/// Limit of a sequence of systems: fails at tau_{-log(1-Q)} with Q independent of L.
struct LimitModel {
    FailureFractionLaw fraction;
    SubordinatorSpec subordinator;
};

struct ReliabilityEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::optional<double> closed_form;
};

inline constexpr std::size_t default_mttf_cap = 30;

/// Draws the failure rank from the signature, then the matching order statistic.
inline double sample_system_failure(const SystemModel& model, rng_t& rng) {
    const std::size_t k = sample_failure_index(model.signature, rng);
    return sample_kth_failure(model.subordinator, model.size(), k, rng);
}

namespace detail {

inline ReliabilityEstimate tail_frequency(std::size_t hits, std::size_t samples) {
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(samples)), std::nullopt};
}

}  // namespace detail

/// Monte Carlo estimate of R(t) = P(T_sys > t) with binomial standard error.
inline ReliabilityEstimate reliability_mc(const SystemModel& model, double t, std::size_t samples,
                                          rng_t& rng) {
    if (samples < 2) throw domain_error("reliability estimate needs at least two samples");
    if (!(t >= 0.0)) throw domain_error("reliability time must be nonnegative");
    std::size_t alive = 0;
    for (std::size_t i = 0; i < samples; ++i)
        if (sample_system_failure(model, rng) > t) ++alive;
    return detail::tail_frequency(alive, samples);
}

/*!
 * Exact mean time to failure,
 *
 *   E[T_sys] = sum_k sum_{l=n-k+1}^{n} C(n,l) C(l-1,n-k) s_k / psi(l) (-1)^{l-n+k-1}.
 *
 * Terms are formed from log magnitudes with an explicit sign and summed with
 * compensation. The alternating sum cancels catastrophically as n grows, so
 * sizes above `cap` are refused.
 */
inline double mttf_exact(const SystemModel& model, std::size_t cap = default_mttf_cap) {
    const std::size_t n = model.size();
    if (n > cap)
        throw capacity_error("exact MTTF is limited to n <= " + std::to_string(cap) +
                             " in double precision; use the Monte Carlo estimate");
    std::vector<double> log_psi(n + 1, 0.0);
    for (std::size_t l = 1; l <= n; ++l) {
        const double psi = laplace_exponent(model.subordinator, static_cast<double>(l));
        if (!(psi > 0.0)) throw degenerate_model_error("laplace exponent vanishes");
        log_psi[l] = std::log(psi);
    }
    const double nd = static_cast<double>(n);
    compensated_sum total;
    for (std::size_t k = 1; k <= n; ++k) {
        const double s = model.signature.weight(k);
        if (s == 0.0) continue;
        const double log_s = std::log(s);
        for (std::size_t l = n - k + 1; l <= n; ++l) {
            const double log_mag = log_binomial(nd, static_cast<double>(l)) +
                                   log_binomial(static_cast<double>(l - 1), static_cast<double>(n - k)) +
                                   log_s - log_psi[l];
            const bool negative = (l + k - n - 1) % 2 == 1;
            const double term = std::exp(log_mag);
            total.add(negative ? -term : term);
        }
    }
    const double mean = total.value();
    if (!(mean > 0.0))
        throw degenerate_model_error("exact MTTF lost all precision to cancellation");
    return mean;
}

inline double limit_passage_sample(const LimitModel& limit, rng_t& rng) {
    const double barrier = limit.fraction.sample_barrier(rng);
    PassageWalker walker(limit.subordinator, rng);
    return walker.passage(barrier);
}

/*!
 * Monte Carlo estimate of P(L_t < -log(1 - Q)).
 *
 * L_t and Q come from two child streams split off `rng`, so their
 * independence does not depend on draw order. Closed forms are attached for
 * Q ~ beta(1, b), exp(-t psi(b)), and for a point mass under pure drift.
 */
inline ReliabilityEstimate limit_reliability(const LimitModel& limit, double t, std::size_t samples,
                                             rng_t& rng) {
    if (samples < 2) throw domain_error("reliability estimate needs at least two samples");
    if (!(t >= 0.0)) throw domain_error("reliability time must be nonnegative");
    rng_t path_rng = split(rng);
    rng_t fraction_rng = split(rng);
    std::size_t alive = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double level = sample_value(limit.subordinator, t, path_rng);
        const double barrier = limit.fraction.sample_barrier(fraction_rng);
        if (level < barrier) ++alive;
    }
    auto out = detail::tail_frequency(alive, samples);
    if (const auto* beta = std::get_if<FailureFractionLaw::beta_one_b>(&limit.fraction.variant()))
        out.closed_form = std::exp(-t * laplace_exponent(limit.subordinator, beta->b));
    if (const auto* point = std::get_if<FailureFractionLaw::point_mass>(&limit.fraction.variant());
        point && limit.subordinator.jump_rate() == 0.0)
        out.closed_form = limit.subordinator.drift() * t < -std::log1p(-point->p) ? 1.0 : 0.0;
    return out;
}

/// Monte Carlo estimate of 1 - E[(1 - exp(-L_t))^b].
inline ReliabilityEstimate limit_reliability_reversed(double b, const SubordinatorSpec& spec,
                                                      double t, std::size_t samples, rng_t& rng) {
    if (!(b > 0.0)) throw domain_error("b must be positive");
    if (samples < 2) throw domain_error("reliability estimate needs at least two samples");
    if (!(t >= 0.0)) throw domain_error("reliability time must be nonnegative");
    std::vector<double> values(samples);
    for (auto& v : values) {
        const double level = sample_value(spec, t, rng);
        v = 1.0 - std::pow(-std::expm1(-level), b);
    }
    const auto est = mean_and_se(values);
    ReliabilityEstimate out{est.mean, est.standard_error, std::nullopt};
    if (b == 1.0) out.closed_form = std::exp(-t * laplace_exponent(spec, 1.0));
    return out;
}

}  // namespace lfmo
