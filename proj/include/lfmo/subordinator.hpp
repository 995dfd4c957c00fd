#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lfmo/error.hpp"
#include "lfmo/random.hpp"

namespace lfmo {

// ---------------------------------------------------------------------------
// Jump laws
// ---------------------------------------------------------------------------

struct uniform01_jumps {
    friend bool operator==(const uniform01_jumps&, const uniform01_jumps&) = default;
};

struct exponential_jumps {
    double rate = 1.0;
    friend bool operator==(const exponential_jumps&, const exponential_jumps&) = default;
};

/// Standard Pareto on [scale, inf) with tail index alpha.
struct pareto_jumps {
    double alpha = 1.5;
    double scale = 1.0;
    friend bool operator==(const pareto_jumps&, const pareto_jumps&) = default;
};

/*!
 * Law of the (nonnegative) jump sizes of a compound Poisson subordinator.
 *
 * New laws need a sampler, a mean and a Laplace transform E[exp(-x J)]; the
 * visitors below are the only places that dispatch on the alternative.
 */
class JumpLaw {
  public:
    using variant_type = std::variant<uniform01_jumps, exponential_jumps, pareto_jumps>;

    JumpLaw() = default;
    JumpLaw(uniform01_jumps j) : law_(j) {}
    JumpLaw(exponential_jumps j) : law_(j) {
        if (!(j.rate > 0.0) || !std::isfinite(j.rate))
            throw domain_error("exponential jump rate must be positive");
    }
    JumpLaw(pareto_jumps j) : law_(j) {
        if (!(j.alpha > 0.0) || !(j.scale > 0.0) || !std::isfinite(j.alpha) ||
            !std::isfinite(j.scale))
            throw domain_error("pareto alpha and scale must be positive");
    }

    static JumpLaw uniform01() { return {uniform01_jumps{}}; }
    static JumpLaw exponential(double rate) { return {exponential_jumps{rate}}; }
    static JumpLaw pareto(double alpha, double scale = 1.0) { return {pareto_jumps{alpha, scale}}; }

    const variant_type& variant() const noexcept { return law_; }

    std::string name() const {
        return std::visit(
            [](const auto& j) -> std::string {
                using T = std::decay_t<decltype(j)>;
                if constexpr (std::is_same_v<T, uniform01_jumps>) return "uniform01";
                else if constexpr (std::is_same_v<T, exponential_jumps>) return "exponential";
                else return "pareto";
            },
            law_);
    }

    double sample(rng_t& rng) const {
        return std::visit(
            [&](const auto& j) -> double {
                using T = std::decay_t<decltype(j)>;
                if constexpr (std::is_same_v<T, uniform01_jumps>)
                    return std::generate_canonical<double, 64>(rng);
                else if constexpr (std::is_same_v<T, exponential_jumps>)
                    return standard_exponential(rng) / j.rate;
                else
                    return j.scale * std::pow(uniform_open0(rng), -1.0 / j.alpha);
            },
            law_);
    }

    // Infinite for pareto with alpha <= 1.
    double mean() const {
        return std::visit(
            [](const auto& j) -> double {
                using T = std::decay_t<decltype(j)>;
                if constexpr (std::is_same_v<T, uniform01_jumps>) return 0.5;
                else if constexpr (std::is_same_v<T, exponential_jumps>) return 1.0 / j.rate;
                else
                    return j.alpha > 1.0 ? j.alpha * j.scale / (j.alpha - 1.0)
                                         : std::numeric_limits<double>::infinity();
            },
            law_);
    }

    /// E[exp(-x J)] for x >= 0.
    double laplace_transform(double x) const {
        if (x < 0.0 || std::isnan(x)) throw domain_error("laplace transform needs x >= 0");
        if (x == 0.0) return 1.0;
        return std::visit(
            [x](const auto& j) -> double {
                using T = std::decay_t<decltype(j)>;
                if constexpr (std::is_same_v<T, uniform01_jumps>) {
                    // (1 - e^{-x}) / x, accurate near 0
                    return -std::expm1(-x) / x;
                } else if constexpr (std::is_same_v<T, exponential_jumps>) {
                    return j.rate / (j.rate + x);
                } else {
                    return pareto_laplace(j.alpha, j.scale, x);
                }
            },
            law_);
    }

    friend bool operator==(const JumpLaw&, const JumpLaw&) = default;

  private:
    // With u = scale / j the integral becomes int_0^1 alpha u^{alpha-1} e^{-x scale / u} du,
    // a bounded integrand on a finite interval.
    static double pareto_laplace(double alpha, double scale, double x) {
        const double c = x * scale;
        auto integrand = [alpha, c](double u) -> double {
            if (u <= 0.0) return 0.0;
            return alpha * std::pow(u, alpha - 1.0) * std::exp(-c / u);
        };
        double error = 0.0;
        return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0,
                                                                            30, 1e-10, &error);
    }

    variant_type law_ = uniform01_jumps{};
};

// ---------------------------------------------------------------------------
// Subordinator specification
// ---------------------------------------------------------------------------

/// L_t = drift * t + sum_{i <= N_t} J_i with N a Poisson process of rate jump_rate.
class SubordinatorSpec {
  public:
    SubordinatorSpec(double drift, double jump_rate, JumpLaw jumps = JumpLaw::uniform01())
        : drift_(drift), jump_rate_(jump_rate), jumps_(std::move(jumps)) {
        if (!(drift >= 0.0) || !std::isfinite(drift))
            throw domain_error("drift must be finite and nonnegative");
        if (!(jump_rate >= 0.0) || !std::isfinite(jump_rate))
            throw domain_error("jump rate must be finite and nonnegative");
        if (drift == 0.0 && jump_rate == 0.0)
            throw degenerate_model_error("drift and jump rate both zero: the subordinator never passes any barrier");
    }

    static SubordinatorSpec pure_drift(double drift) { return {drift, 0.0}; }

    double drift() const noexcept { return drift_; }
    double jump_rate() const noexcept { return jump_rate_; }
    const JumpLaw& jumps() const noexcept { return jumps_; }

    double mean_rate() const { return drift_ + (jump_rate_ > 0.0 ? jump_rate_ * jumps_.mean() : 0.0); }

    friend bool operator==(const SubordinatorSpec&, const SubordinatorSpec&) = default;

  private:
    double drift_;
    double jump_rate_;
    JumpLaw jumps_;
};

/// psi(x) = mu x + lambda (1 - E[exp(-x J)]).
inline double laplace_exponent(const SubordinatorSpec& spec, double x) {
    if (!(x >= 0.0)) throw domain_error("laplace exponent needs x >= 0");
    double psi = spec.drift() * x;
    if (spec.jump_rate() > 0.0) psi += spec.jump_rate() * (1.0 - spec.jumps().laplace_transform(x));
    return psi;
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

class SubordinatorPath {
  public:
    SubordinatorPath(double drift, double horizon, std::vector<double> epochs,
                     std::vector<double> sizes)
        : drift_(drift), horizon_(horizon), epochs_(std::move(epochs)), sizes_(std::move(sizes)) {
        if (!(horizon > 0.0)) throw domain_error("path horizon must be positive");
        if (!(drift >= 0.0)) throw domain_error("drift must be nonnegative");
        if (epochs_.size() != sizes_.size())
            throw domain_error("jump epochs and sizes differ in length");
        cumulative_.reserve(sizes_.size());
        double acc = 0.0;
        double prev = 0.0;
        for (std::size_t i = 0; i < epochs_.size(); ++i) {
            if (!(epochs_[i] > prev) || epochs_[i] > horizon_)
                throw domain_error("jump epochs must be strictly increasing in (0, horizon]");
            if (!(sizes_[i] >= 0.0)) throw domain_error("jump sizes must be nonnegative");
            prev = epochs_[i];
            acc += sizes_[i];
            cumulative_.push_back(acc);
        }
    }

    double drift() const noexcept { return drift_; }
    double horizon() const noexcept { return horizon_; }
    std::span<const double> jump_epochs() const noexcept { return epochs_; }
    std::span<const double> jump_sizes() const noexcept { return sizes_; }

    /// Right-continuous value mu t + sum of jumps with epoch <= t.
    double value_at(double t) const {
        if (!(t >= 0.0)) throw domain_error("path evaluated at negative time");
        if (t > horizon_) throw std::out_of_range("path evaluated beyond its horizon");
        const auto it = std::upper_bound(epochs_.begin(), epochs_.end(), t);
        const auto count = static_cast<std::size_t>(it - epochs_.begin());
        return drift_ * t + (count == 0 ? 0.0 : cumulative_[count - 1]);
    }

  private:
    double drift_;
    double horizon_;
    std::vector<double> epochs_;
    std::vector<double> sizes_;
    std::vector<double> cumulative_;
};

inline double value_at(const SubordinatorPath& path, double t) { return path.value_at(t); }

inline SubordinatorPath sample_path(const SubordinatorSpec& spec, double horizon, rng_t& rng) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw domain_error("path horizon must be positive and finite");
    std::vector<double> epochs;
    std::vector<double> sizes;
    if (spec.jump_rate() > 0.0) {
        double t = 0.0;
        for (;;) {
            t += standard_exponential(rng) / spec.jump_rate();
            if (t > horizon) break;
            epochs.push_back(t);
            sizes.push_back(spec.jumps().sample(rng));
        }
    }
    return {spec.drift(), horizon, std::move(epochs), std::move(sizes)};
}

/// Draws L_t directly (Poisson number of jumps plus drift), without the path.
inline double sample_value(const SubordinatorSpec& spec, double t, rng_t& rng) {
    if (!(t >= 0.0)) throw domain_error("time must be nonnegative");
    double value = spec.drift() * t;
    if (spec.jump_rate() > 0.0 && t > 0.0) {
        std::poisson_distribution<long long> count(spec.jump_rate() * t);
        for (long long i = count(rng); i > 0; --i) value += spec.jumps().sample(rng);
    }
    return value;
}

/*!
 * Walks one subordinator path lazily and reports first-passage times over a
 * nondecreasing sequence of barriers.
 *
 * Passage is strict: tau_B = inf{t : L_t > B}. Between jumps the value grows
 * linearly, so a drift crossing is located exactly at t + (B - v) / mu; a jump
 * landing exactly on B does not count. Several barriers may share a passage
 * time when a single jump clears them all.
 */
class PassageWalker {
  public:
    PassageWalker(const SubordinatorSpec& spec, rng_t& rng) : spec_(&spec), rng_(&rng) {}

    double time() const noexcept { return time_; }
    double value() const noexcept { return value_; }

    double passage(double barrier) {
        if (!(barrier >= 0.0) || std::isnan(barrier))
            throw domain_error("barrier must be nonnegative");
        if (barrier < last_barrier_)
            throw domain_error("passage walker barriers must be nondecreasing");
        last_barrier_ = barrier;
        if (std::isinf(barrier)) return std::numeric_limits<double>::infinity();

        const double mu = spec_->drift();
        const double lambda = spec_->jump_rate();
        for (;;) {
            if (value_ > barrier) return time_;
            if (lambda == 0.0) {
                time_ += (barrier - value_) / mu;
                value_ = barrier;
                return time_;
            }
            if (!has_next_) {
                next_epoch_ = time_ + standard_exponential(*rng_) / lambda;
                has_next_ = true;
            }
            if (mu > 0.0) {
                const double before_jump = value_ + mu * (next_epoch_ - time_);
                if (before_jump >= barrier) {
                    time_ += (barrier - value_) / mu;
                    value_ = barrier;
                    return time_;
                }
                value_ = before_jump;
            }
            value_ += spec_->jumps().sample(*rng_);
            time_ = next_epoch_;
            has_next_ = false;
        }
    }

  private:
    const SubordinatorSpec* spec_;
    rng_t* rng_;
    double time_ = 0.0;
    double value_ = 0.0;
    double next_epoch_ = 0.0;
    bool has_next_ = false;
    double last_barrier_ = 0.0;
};

inline double first_passage(const SubordinatorSpec& spec, double barrier, rng_t& rng) {
    if (!(barrier > 0.0)) throw domain_error("first passage barrier must be positive");
    PassageWalker walker(spec, rng);
    return walker.passage(barrier);
}

}  // namespace lfmo
