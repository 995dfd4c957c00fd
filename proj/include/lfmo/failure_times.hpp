#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "lfmo/error.hpp"
#include "lfmo/random.hpp"
#include "lfmo/subordinator.hpp"

namespace lfmo {

/// Order statistics eps_{1:n} <= ... <= eps_{n:n} of n iid standard exponentials.
class TriggerSet {
  public:
    explicit TriggerSet(std::vector<double> sorted) : sorted_(std::move(sorted)) {
        if (sorted_.empty()) throw domain_error("trigger set needs n >= 1");
        if (!std::is_sorted(sorted_.begin(), sorted_.end()))
            throw domain_error("triggers must be sorted");
    }

    std::size_t size() const noexcept { return sorted_.size(); }
    std::span<const double> sorted() const noexcept { return sorted_; }
    /// k-th smallest trigger, 1-based.
    double order_statistic(std::size_t k) const {
        if (k < 1 || k > sorted_.size()) throw domain_error("order statistic index out of range");
        return sorted_[k - 1];
    }

  private:
    std::vector<double> sorted_;
};

inline TriggerSet sample_triggers(std::size_t n, rng_t& rng) {
    if (n == 0) throw domain_error("trigger set needs n >= 1");
    std::vector<double> eps(n);
    for (auto& e : eps) e = standard_exponential(rng);
    std::sort(eps.begin(), eps.end());
    return TriggerSet(std::move(eps));
}

/// Exact draw of eps_{k:n} in O(1): 1 - U_{k:n} = G2 / (G1 + G2) with
/// G1 ~ Gamma(k), G2 ~ Gamma(n - k + 1), so eps_{k:n} = log1p(G1 / G2).
inline double sample_kth_trigger(std::size_t n, std::size_t k, rng_t& rng) {
    if (k < 1 || k > n) throw domain_error("order statistic index must lie in [1, n]");
    std::gamma_distribution<double> lower(static_cast<double>(k), 1.0);
    std::gamma_distribution<double> upper(static_cast<double>(n - k + 1), 1.0);
    const double g1 = lower(rng);
    const double g2 = upper(rng);
    return std::log1p(g1 / g2);
}

/*!
 * One LFMO(n) vector in component order.
 *
 * All components share a single lazily walked subordinator path; component
 * i fails when the path first exceeds its trigger. Triggers are visited in
 * increasing order so the walk is one pass.
 */
inline std::vector<double> sample_failure_times(const SubordinatorSpec& spec, std::size_t n,
                                                rng_t& rng) {
    if (n == 0) throw domain_error("need at least one component");
    std::vector<double> eps(n);
    for (auto& e : eps) e = standard_exponential(rng);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return eps[a] < eps[b]; });

    std::vector<double> times(n);
    PassageWalker walker(spec, rng);
    for (std::size_t idx : order) times[idx] = walker.passage(eps[idx]);
    return times;
}

/// Exact draw of T_{k:n}: first passage over eps_{k:n}.
inline double sample_kth_failure(const SubordinatorSpec& spec, std::size_t n, std::size_t k,
                                 rng_t& rng) {
    const double trigger = sample_kth_trigger(n, k, rng);
    PassageWalker walker(spec, rng);
    return walker.passage(trigger);
}

}  // namespace lfmo
