#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "lfmo/error.hpp"
#include "lfmo/random.hpp"
#include "lfmo/signature.hpp"

namespace lfmo {

/*!
 * Piecewise-linear density on [0, 1] read from a table of (q, f(q)) knots.
 *
 * The table is renormalized to unit mass (trapezoid rule is exact for the
 * interpolant) and sampled by inverting the cumulative within each cell.
 */
class TabulatedDensity {
  public:
    TabulatedDensity(std::vector<double> knots, std::vector<double> values)
        : q_(std::move(knots)), f_(std::move(values)) {
        if (q_.size() < 2 || q_.size() != f_.size())
            throw validation_error("density table needs at least two (q, f) knots");
        for (std::size_t i = 0; i < q_.size(); ++i) {
            if (!(q_[i] >= 0.0 && q_[i] <= 1.0))
                throw validation_error("density knots must lie in [0, 1]");
            if (i > 0 && !(q_[i] > q_[i - 1]))
                throw validation_error("density knots must be strictly increasing");
            if (!(f_[i] >= 0.0) || !std::isfinite(f_[i]))
                throw validation_error("density values must be finite and nonnegative");
        }
        cdf_.assign(q_.size(), 0.0);
        for (std::size_t i = 1; i < q_.size(); ++i)
            cdf_[i] = cdf_[i - 1] + 0.5 * (f_[i] + f_[i - 1]) * (q_[i] - q_[i - 1]);
        const double mass = cdf_.back();
        if (!(mass > 0.0)) throw validation_error("density table has zero mass");
        for (auto& v : f_) v /= mass;
        for (auto& v : cdf_) v /= mass;
    }

    static TabulatedDensity load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw validation_error("cannot open density file '" + path + "'");
        std::vector<double> q;
        std::vector<double> f;
        double a = 0.0;
        double b = 0.0;
        while (in >> a >> b) {
            q.push_back(a);
            f.push_back(b);
        }
        if (!in.eof()) throw validation_error("density file '" + path + "': expected 'q f' pairs");
        return {std::move(q), std::move(f)};
    }

    double operator()(double x) const {
        if (x < q_.front() || x > q_.back()) return 0.0;
        auto it = std::upper_bound(q_.begin(), q_.end(), x);
        if (it == q_.end()) return f_.back();
        const auto i = static_cast<std::size_t>(it - q_.begin());
        const double w = (x - q_[i - 1]) / (q_[i] - q_[i - 1]);
        return f_[i - 1] + w * (f_[i] - f_[i - 1]);
    }

    double sample(rng_t& rng) const {
        const double u = std::generate_canonical<double, 64>(rng);
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), 1,
                                                q_.size() - 1);
        const double h = q_[i] - q_[i - 1];
        const double mass = u - cdf_[i - 1];
        const double f0 = f_[i - 1];
        const double a = (f_[i] - f_[i - 1]) / (2.0 * h);
        // a d^2 + f0 d = mass, in the cancellation-free root form
        const double disc = std::sqrt(std::max(0.0, f0 * f0 + 4.0 * a * mass));
        const double denom = f0 + disc;
        const double d = denom > 0.0 ? 2.0 * mass / denom : 0.0;
        return q_[i - 1] + std::clamp(d, 0.0, h);
    }

  private:
    std::vector<double> q_;
    std::vector<double> f_;
    std::vector<double> cdf_;
};

/*!
 * Law of the failed fraction Q at which a system dies.
 *
 * Either the finite-n law Q_n (atoms k / (n + 1) with weights s_k) or a
 * limit law on (0, 1). The barrier -log(1 - Q) is what the lifetime
 * sampler consumes, so each law also provides a stable barrier draw.
 */
class FailureFractionLaw {
  public:
    struct beta_one_b {
        double b;
    };
    struct point_mass {
        double p;
    };
    struct discrete {
        Signature signature;
    };
    struct custom {
        std::string name;
        std::function<double(rng_t&)> sampler;
        std::function<double(double)> density;
    };
    using variant_type = std::variant<beta_one_b, point_mass, discrete, custom>;

    /// beta(1, b): density b (1 - q)^{b - 1}.
    static FailureFractionLaw beta(double b) {
        if (!(b > 0.0) || !std::isfinite(b)) throw domain_error("beta(1, b) needs b > 0");
        return FailureFractionLaw(beta_one_b{b});
    }
    static FailureFractionLaw point(double p) {
        if (!(p > 0.0 && p < 1.0)) throw domain_error("point mass must lie in (0, 1)");
        return FailureFractionLaw(point_mass{p});
    }
    static FailureFractionLaw from_signature(Signature sig) {
        return FailureFractionLaw(discrete{std::move(sig)});
    }
    static FailureFractionLaw from_density(std::string name, std::function<double(rng_t&)> sampler,
                                           std::function<double(double)> density) {
        if (!sampler) throw domain_error("custom fraction law needs a sampler");
        return FailureFractionLaw(custom{std::move(name), std::move(sampler), std::move(density)});
    }
    static FailureFractionLaw tabulated(TabulatedDensity table, std::string name = "tabulated") {
        auto shared = std::make_shared<const TabulatedDensity>(std::move(table));
        return from_density(
            std::move(name), [shared](rng_t& rng) { return shared->sample(rng); },
            [shared](double q) { return (*shared)(q); });
    }

    const variant_type& variant() const noexcept { return law_; }

    std::string name() const {
        return std::visit(
            [](const auto& l) -> std::string {
                using T = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<T, beta_one_b>) return "beta";
                else if constexpr (std::is_same_v<T, point_mass>) return "point-mass";
                else if constexpr (std::is_same_v<T, discrete>) return "discrete";
                else return l.name;
            },
            law_);
    }

    double sample(rng_t& rng) const {
        return std::visit(
            [&](const auto& l) -> double {
                using T = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<T, beta_one_b>)
                    return -std::expm1(std::log(uniform_open0(rng)) / l.b);
                else if constexpr (std::is_same_v<T, point_mass>)
                    return l.p;
                else if constexpr (std::is_same_v<T, discrete>)
                    return static_cast<double>(sample_failure_index(l.signature, rng)) /
                           (static_cast<double>(l.signature.size()) + 1.0);
                else
                    return l.sampler(rng);
            },
            law_);
    }

    /// Draws -log(1 - Q). Draws of a custom law that land outside (0, 1) are redrawn.
    double sample_barrier(rng_t& rng) const {
        if (const auto* beta = std::get_if<beta_one_b>(&law_))
            return -std::log(uniform_open0(rng)) / beta->b;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            const double q = sample(rng);
            if (q > 0.0 && q < 1.0) return -std::log1p(-q);
        }
        throw degenerate_model_error("failure fraction law keeps producing values outside (0, 1)");
    }

    std::optional<double> density(double q) const {
        if (const auto* beta = std::get_if<beta_one_b>(&law_)) {
            if (!(q > 0.0 && q < 1.0)) return 0.0;
            return beta->b * std::pow(1.0 - q, beta->b - 1.0);
        }
        if (const auto* c = std::get_if<custom>(&law_); c && c->density) return c->density(q);
        return std::nullopt;
    }

    /// Integral of the density over (0, 1); tanh-sinh copes with endpoint singularities.
    double density_mass() const {
        if (!density(0.5)) throw domain_error("fraction law has no density");
        boost::math::quadrature::tanh_sinh<double> integrator;
        // beta(1, b) is integrated in u = 1 - q so the singularity at q = 1 sits at u = 0
        if (const auto* beta = std::get_if<beta_one_b>(&law_)) {
            const double b = beta->b;
            return integrator.integrate([b](double u) { return b * std::pow(u, b - 1.0); }, 0.0, 1.0,
                                        1e-10);
        }
        return integrator.integrate([this](double q) { return *density(q); }, 0.0, 1.0, 1e-10);
    }

    /// Atoms (k / (n + 1), s_k) of the finite-n law.
    std::vector<std::pair<double, double>> atoms() const {
        const auto* d = std::get_if<discrete>(&law_);
        if (!d) throw domain_error("only the finite-n law has atoms");
        const std::size_t n = d->signature.size();
        std::vector<std::pair<double, double>> out;
        out.reserve(n);
        for (std::size_t k = 1; k <= n; ++k)
            out.emplace_back(static_cast<double>(k) / (static_cast<double>(n) + 1.0),
                             d->signature.weight(k));
        return out;
    }

  private:
    explicit FailureFractionLaw(variant_type law) : law_(std::move(law)) {}
    variant_type law_;
};

}  // namespace lfmo
