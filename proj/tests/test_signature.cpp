#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "lfmo/fraction_law.hpp"
#include "lfmo/signature.hpp"
#include "oracles.hpp"

using namespace lfmo;

namespace {

void expect_vector_near(const Signature& sig, const std::vector<double>& expected, double tol) {
    ASSERT_EQ(sig.size(), expected.size());
    for (std::size_t k = 0; k < expected.size(); ++k)
        EXPECT_NEAR(sig.values()[k], expected[k], tol) << "k=" << k + 1;
}

double plain_sum(std::span<const double> xs) {
    long double s = 0.0L;
    for (double x : xs) s += x;
    return static_cast<double>(s);
}

std::vector<double> canonical_kofn(std::size_t n, std::size_t k) {
    std::vector<double> s(n, 0.0);
    s[k - 1] = 1.0;
    return s;
}

}  // namespace

TEST(StructureSignature, SeriesAndParallel) {
    EXPECT_EQ(signature_from_structure(StructureFunction::series(4)), Signature({1, 0, 0, 0}));
    EXPECT_EQ(signature_from_structure(StructureFunction::parallel(4)), Signature({0, 0, 0, 1}));
}

TEST(StructureSignature, BridgeMatchesPermutationOracle) {
    const auto oracle_sig = oracle::bridge_signature_by_permutations();
    const auto sig = signature_from_structure(StructureFunction::bridge5());
    expect_vector_near(sig, oracle_sig, 1e-12);
    expect_vector_near(sig, {0.0, 0.2, 0.6, 0.2, 0.0}, 1e-12);
    EXPECT_TRUE(StructureFunction::bridge5().is_coherent());
}

TEST(StructureSignature, BridgeEvaluatorAgreesWithGraphConnectivity) {
    const auto phi = StructureFunction::bridge5();
    for (StructureFunction::config_t x = 0; x < 32; ++x) {
        std::array<bool, 5> up{};
        for (int c = 0; c < 5; ++c) up[c] = (x >> c) & 1u;
        EXPECT_EQ(phi(x), oracle::bridge_connected(up)) << phi.bitstring(x);
    }
}

TEST(StructureSignature, KOutOfNAgreesWithEnumeration) {
    for (std::size_t n = 1; n <= 10; ++n)
        for (std::size_t k = 1; k <= n; ++k) {
            const auto canonical = canonical_kofn(n, k);
            EXPECT_EQ(kofn_signature(n, k), Signature(canonical));
            EXPECT_EQ(signature_from_structure(StructureFunction::k_out_of_n(n, k)), Signature(canonical))
                << n << ":" << k;
        }
    EXPECT_EQ(kofn_signature(3, 2), Signature({0, 1, 0}));
    EXPECT_THROW(kofn_signature(3, 0), lfmo::domain_error);
    EXPECT_THROW(kofn_signature(3, 4), lfmo::domain_error);
}

TEST(StructureSignature, SeriesParallelCanonicalUpToTen) {
    for (std::size_t n = 1; n <= 10; ++n) {
        EXPECT_EQ(signature_from_structure(StructureFunction::series(n)), Signature(canonical_kofn(n, 1)));
        EXPECT_EQ(signature_from_structure(StructureFunction::parallel(n)), Signature(canonical_kofn(n, n)));
    }
}

TEST(StructureSignature, NonMonotoneRejectedWithPair) {
    // series on 3 components, except that configuration 110 is declared working while 111 is not
    std::vector<std::uint8_t> table(8, 0);
    table[0b011] = 1;
    const auto phi = StructureFunction::from_truth_table(3, table);
    ASSERT_TRUE(phi.find_monotonicity_violation().has_value());
    try {
        signature_from_structure(phi);
        FAIL() << "expected validation_error";
    } catch (const validation_error& e) {
        EXPECT_NE(std::string(e.what()).find("110"), std::string::npos) << e.what();
    }
}

TEST(StructureSignature, MutatedBuiltinsAreDetected) {
    for (std::size_t n = 2; n <= 6; ++n) {
        const auto base = StructureFunction::k_out_of_n(n, 2);
        std::vector<std::uint8_t> table(std::size_t{1} << n);
        for (StructureFunction::config_t x = 0; x < table.size(); ++x) table[x] = base(x);
        // flip one working configuration above a failed one
        const auto all = static_cast<StructureFunction::config_t>(table.size() - 1);
        table[all] = 0;
        EXPECT_TRUE(StructureFunction::from_truth_table(n, table).find_monotonicity_violation());
    }
}

TEST(StructureSignature, IrrelevantComponentFound) {
    // component 3 never matters
    const StructureFunction phi(3, [](StructureFunction::config_t x) { return (x & 0b011) == 0b011; }, "dummy");
    EXPECT_EQ(phi.irrelevant_components(), std::vector<std::size_t>{3});
    EXPECT_FALSE(phi.is_coherent());
}

TEST(StructureSignature, CapacityLimit) {
    const StructureFunction big(26, [](StructureFunction::config_t x) { return x != 0; }, "big");
    EXPECT_THROW(signature_from_structure(big), capacity_error);
}

TEST(TruthTable, ParsesBridgeFile) {
    const auto phi = StructureFunction::bridge5();
    std::stringstream text;
    text << "5\n";
    for (StructureFunction::config_t x = 0; x < 32; ++x) text << phi.bitstring(x) << " " << phi(x) << "\n";
    const auto parsed = StructureFunction::read_truth_table(text);
    EXPECT_EQ(signature_from_structure(parsed), signature_from_structure(phi));

    const auto path = std::filesystem::temp_directory_path() / "lfmo_bridge_table.txt";
    {
        std::ofstream out(path);
        out << text.str();
    }
    EXPECT_EQ(signature_from_structure(StructureFunction::load_truth_table(path.string())),
              signature_from_structure(phi));
    std::filesystem::remove(path);
}

TEST(TruthTable, RejectsMalformedInput) {
    std::stringstream missing("2\n00 0\n01 0\n10 0\n");
    EXPECT_THROW(StructureFunction::read_truth_table(missing), validation_error);
    std::stringstream duplicate("1\n0 0\n0 0\n1 1\n");
    EXPECT_THROW(StructureFunction::read_truth_table(duplicate), validation_error);
    std::stringstream bad_bits("1\n2 0\n1 1\n");
    EXPECT_THROW(StructureFunction::read_truth_table(bad_bits), validation_error);
    EXPECT_THROW(StructureFunction::load_truth_table("/nonexistent/table.txt"), validation_error);
}

TEST(Signature, RejectsInvalidVectors) {
    EXPECT_THROW(Signature({0.5, 0.6}), lfmo::domain_error);
    EXPECT_THROW(Signature({1.5, -0.5}), lfmo::domain_error);
    EXPECT_THROW(Signature(std::vector<double>{}), lfmo::domain_error);
    EXPECT_NO_THROW(Signature({0.5, 0.5 + 5e-13}));
}

TEST(Signature, PhiReconstruction) {
    for (const auto& sig : {powerlaw_signature(7, 0.5), binomial_signature(9, 0.3), kofn_signature(4, 2),
                            signature_from_structure(StructureFunction::bridge5())}) {
        const auto phi = sig.phi();
        const std::size_t n = sig.size();
        EXPECT_EQ(phi.front(), 0.0);
        EXPECT_NEAR(phi.back(), 1.0, 1e-12);
        for (std::size_t j = 1; j <= n; ++j) EXPECT_GE(phi[j], phi[j - 1]);
        for (std::size_t k = 1; k <= n; ++k) EXPECT_NEAR(phi[n - k + 1] - phi[n - k], sig.weight(k), 1e-15);
    }
}

TEST(PowerLaw, Examples) {
    expect_vector_near(powerlaw_signature(4, 1.0), {0.25, 0.25, 0.25, 0.25}, 1e-15);
    expect_vector_near(powerlaw_signature(2, 2.0), {2.0 / 3.0, 1.0 / 3.0}, 1e-15);
    const double a = 1 / std::sqrt(3.0), b = 1 / std::sqrt(2.0), c = 1.0, z = a + b + c;
    expect_vector_near(powerlaw_signature(3, 0.5), {a / z, b / z, c / z}, 1e-15);
    EXPECT_THROW(powerlaw_signature(3, 0.0), lfmo::domain_error);
    EXPECT_THROW(powerlaw_signature(3, -1.0), lfmo::domain_error);
}

TEST(PowerLaw, ReversedExamples) {
    expect_vector_near(reversed_powerlaw_signature(4, 1.0), {0.25, 0.25, 0.25, 0.25}, 1e-15);
    expect_vector_near(reversed_powerlaw_signature(2, 2.0), {1.0 / 3.0, 2.0 / 3.0}, 1e-15);
    for (double b : {0.3, 1.7, 4.0})
        EXPECT_EQ(reversed_powerlaw_signature(11, b), powerlaw_signature(11, b).reversed());
}

TEST(Binomial, Examples) {
    expect_vector_near(binomial_signature(1, 0.3), {1.0}, 0.0);
    expect_vector_near(binomial_signature(3, 0.5), {0.25, 0.5, 0.25}, 1e-15);
    expect_vector_near(binomial_signature(2, 0.3), {0.7, 0.3}, 1e-15);
    EXPECT_THROW(binomial_signature(3, 0.0), lfmo::domain_error);
    EXPECT_THROW(binomial_signature(3, 1.0), lfmo::domain_error);
}

TEST(Binomial, MatchesLogGammaPmf) {
    for (std::size_t n : {5u, 40u, 1000u})
        for (double p : {0.1, 0.5, 0.93}) {
            const auto sig = binomial_signature(n, p);
            const double m = static_cast<double>(n - 1);
            for (std::size_t k = 1; k <= n; ++k) {
                const double j = static_cast<double>(k - 1);
                const double log_pmf = std::lgamma(m + 1) - std::lgamma(j + 1) - std::lgamma(m - j + 1) +
                                       j * std::log(p) + (m - j) * std::log1p(-p);
                const double expected = std::exp(log_pmf);
                EXPECT_NEAR(sig.weight(k), expected, 1e-12 + 1e-9 * expected) << n << ":" << p << ":" << k;
            }
        }
}

TEST(SignatureInvariants, SimplexForRandomParameters) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> b_dist(0.05, 5.0);
    std::uniform_real_distribution<double> p_dist(0.001, 0.999);
    std::uniform_int_distribution<std::size_t> n_dist(1, 5000);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = n_dist(rng);
        for (const auto& sig : {powerlaw_signature(n, b_dist(rng)), reversed_powerlaw_signature(n, b_dist(rng)),
                                binomial_signature(n, p_dist(rng))}) {
            for (double s : sig.values()) EXPECT_GE(s, 0.0);
            EXPECT_NEAR(plain_sum(sig.values()), 1.0, 1e-12);
        }
    }
    for (const auto& sig : {binomial_signature(1000000, 0.37), powerlaw_signature(1000000, 0.5),
                            powerlaw_signature(1000000, 3.0)})
        EXPECT_NEAR(plain_sum(sig.values()), 1.0, 1e-12);
}

TEST(Normalization, Examples) {
    for (std::size_t n : {1u, 2u, 17u, 100000u}) EXPECT_EQ(normalization_asymptotics(n, 1.0), 1.0);
    // b = 2: C n^2 / 2 = n / (n + 1)
    EXPECT_NEAR(normalization_asymptotics(10000, 2.0), 10000.0 / 10001.0, 1e-13);
    EXPECT_LT(std::abs(normalization_asymptotics(1000000, 0.5) - 1.0), 2e-3);
}

TEST(Normalization, HighPrecisionValues) {
    // b = 0.5 values computed to 30 digits
    EXPECT_NEAR(normalization_asymptotics(1000, 0.5), 1.02337412393, 1e-10);
    EXPECT_NEAR(normalization_asymptotics(10000, 0.5), 1.00733011231, 1e-10);
    EXPECT_NEAR(normalization_asymptotics(100000, 0.5), 1.00231185557, 1e-10);
}

TEST(Normalization, BoundsContainValue) {
    for (double b : {0.2, 0.5, 0.9, 1.1, 2.0, 3.5})
        for (std::size_t n : {2u, 10u, 1000u, 100000u}) {
            const auto [lo, hi] = normalization_bounds(n, b);
            const double v = normalization_asymptotics(n, b);
            EXPECT_LE(lo, v * (1 + 1e-12)) << b << ":" << n;
            EXPECT_GE(hi, v * (1 - 1e-12)) << b << ":" << n;
        }
}

TEST(HypothesisB, Examples) {
    EXPECT_DOUBLE_EQ(hypothesis_b_statistic(Signature({1.0})), 2.0);
    EXPECT_GT(hypothesis_b_statistic(kofn_signature(10000, 1)), 0.9);
    EXPECT_GT(hypothesis_b_statistic(powerlaw_signature(100, 1.0)),
              hypothesis_b_statistic(powerlaw_signature(10000, 1.0)));
}

TEST(HypothesisCD, PowerLawOneIsFlat) {
    const std::vector<double> qs{0.1, 0.5, 0.9};
    const std::vector<std::size_t> ns{10, 100, 1000};
    const auto report = hypothesis_cd_check(powerlaw_family(1.0), qs, ns);
    for (const auto& row : report.rows) {
        for (double v : row.scaled) EXPECT_NEAR(v, 1.0, 1e-12);
        EXPECT_TRUE(row.converged);
    }
}

TEST(HypothesisCD, PowerLawHalfMatchesDensity) {
    const std::vector<double> qs{0.25, 0.5, 0.75};
    const std::vector<std::size_t> ns{100000};
    const auto report = hypothesis_cd_check(powerlaw_family(0.5), qs, ns);
    // n s_{ceil(nq)} at n = 1e5 computed to 30 digits
    EXPECT_NEAR(report.rows[0].scaled[0], 0.578681161763861, 1e-10);
    EXPECT_NEAR(report.rows[1].scaled[0], 0.708734422628576, 1e-10);
    EXPECT_NEAR(report.rows[2].scaled[0], 1.00229180993446, 1e-10);
    for (const auto& row : report.rows) {
        EXPECT_NEAR(row.scaled[0], 0.5 * std::pow(1 - row.q, -0.5), 1e-2);
        EXPECT_TRUE(row.converged);
    }
}

TEST(HypothesisCD, BinomialDegeneratesOffCenter) {
    const std::vector<double> qs{0.4};
    const std::vector<std::size_t> ns{10, 100, 1000, 10000};
    const auto report = hypothesis_cd_check(binomial_family(0.5), qs, ns);
    const auto& scaled = report.rows[0].scaled;
    EXPECT_FALSE(report.rows[0].density.has_value());
    EXPECT_FALSE(report.rows[0].converged);
    EXPECT_LT(scaled.back(), 1e-50);
    EXPECT_LT(scaled[3], scaled[2]);
    EXPECT_LT(scaled[2], scaled[1]);
}

TEST(HypothesisCD, PowerLawEnvelopeDominates) {
    for (double b : {0.5, 1.5, 3.0}) {
        const double k_b = powerlaw_normalization_sup(b, 20000);
        for (std::size_t n : {1u, 3u, 10u, 100u, 5000u}) {
            const auto sig = powerlaw_signature(n, b);
            for (double q : {0.01, 0.2, 0.5, 0.8, 0.99}) {
                const double scaled = static_cast<double>(n) * sig.weight(scaled_index(n, q));
                EXPECT_LE(scaled, powerlaw_domination_envelope(b, q, k_b) * (1 + 1e-12))
                    << "b=" << b << " n=" << n << " q=" << q;
            }
        }
    }
}

TEST(ScaledIndex, CeilingWithoutRoundingNoise) {
    EXPECT_EQ(scaled_index(10, 0.3), 3u);
    EXPECT_EQ(scaled_index(100000, 0.5), 50000u);
    EXPECT_EQ(scaled_index(7, 0.01), 1u);
    EXPECT_EQ(scaled_index(7, 0.999), 7u);
}

TEST(SampleFailureIndex, DegenerateAndFrequencies) {
    rng_t rng(1);
    const Signature e3({0, 0, 1, 0, 0});
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_failure_index(e3, rng), 3u);

    auto check = [&](const Signature& sig, const std::vector<double>& expected) {
        const std::size_t draws = 1000000;
        std::vector<std::size_t> counts(sig.size(), 0);
        for (std::size_t i = 0; i < draws; ++i) ++counts[sample_failure_index(sig, rng) - 1];
        for (std::size_t k = 0; k < sig.size(); ++k) {
            const double freq = static_cast<double>(counts[k]) / draws;
            EXPECT_NEAR(freq, expected[k], 4.0 * oracle::binomial_se(expected[k], draws)) << "k=" << k + 1;
        }
    };
    check(Signature({0.25, 0.25, 0.25, 0.25}), {0.25, 0.25, 0.25, 0.25});
    check(powerlaw_signature(3, 2.0), {3.0 / 6, 2.0 / 6, 1.0 / 6});
}

TEST(FractionLaw, DensitiesIntegrateToOne) {
    for (double b : {0.5, 1.0, 2.0, 4.0}) EXPECT_NEAR(FailureFractionLaw::beta(b).density_mass(), 1.0, 1e-8);
    const TabulatedDensity table({0.0, 0.5, 1.0}, {0.0, 2.0, 0.0});
    EXPECT_NEAR(FailureFractionLaw::tabulated(table).density_mass(), 1.0, 1e-8);
    EXPECT_THROW(FailureFractionLaw::point(0.3).density_mass(), lfmo::domain_error);
}

TEST(FractionLaw, AtomsMatchSignature) {
    const auto sig = powerlaw_signature(5, 0.7);
    const auto atoms = FailureFractionLaw::from_signature(sig).atoms();
    ASSERT_EQ(atoms.size(), 5u);
    for (std::size_t k = 1; k <= 5; ++k) {
        EXPECT_DOUBLE_EQ(atoms[k - 1].first, k / 6.0);
        EXPECT_EQ(atoms[k - 1].second, sig.weight(k));
    }
}

TEST(FractionLaw, BarrierDraws) {
    rng_t rng(3);
    EXPECT_DOUBLE_EQ(FailureFractionLaw::point(0.5).sample_barrier(rng), std::log(2.0));
    // beta(1, b) barrier is Exp(b)
    std::vector<double> xs(100000);
    for (auto& x : xs) x = FailureFractionLaw::beta(2.0).sample_barrier(rng);
    double mean = 0;
    for (double x : xs) mean += x / xs.size();
    EXPECT_NEAR(mean, 0.5, 4.0 * 0.5 / std::sqrt(100000.0));
    EXPECT_THROW(FailureFractionLaw::beta(0.0), lfmo::domain_error);
    EXPECT_THROW(FailureFractionLaw::point(1.0), lfmo::domain_error);
}
