#include <doctest.h>

#include <cmath>
#include <random>

#include "focal/calibrate.hpp"
#include "focal/errors.hpp"
#include "focal/metrics.hpp"
#include "focal/sampling.hpp"

using namespace focal;
using doctest::Approx;

namespace {

PredictionSet rows(std::size_t k, std::vector<std::vector<double>> r, std::vector<int> labels) {
    PredictionSet set(k, ScoreKind::Probabilities);
    for (std::size_t i = 0; i < r.size(); ++i) set.add(r[i], labels[i]);
    return set;
}

}  // namespace

TEST_CASE("PredictionSet validation") {
    PredictionSet set(3, ScoreKind::Probabilities);
    CHECK_THROWS_AS(set.add(std::vector<double>{0.5, 0.5}, 0), DimensionError);
    CHECK_THROWS_AS(set.add(std::vector<double>{0.5, 0.5, 0.0}, 3), DomainError);
    CHECK_THROWS_AS(set.add(std::vector<double>{0.5, 0.4, 0.0}, 0), DomainError);
    CHECK_NOTHROW(set.add(std::vector<double>{0.5, 0.5 - 1e-7, 1e-7}, 0));
    PredictionSet logits(2, ScoreKind::Logits);
    CHECK_NOTHROW(logits.add(std::vector<double>{3.0, -7.0}, 1));
    CHECK_THROWS_AS(logits.add(std::vector<double>{NAN, 0.0}, 1), DomainError);
    CHECK_THROWS_AS(PredictionSet(1, ScoreKind::Logits), DimensionError);
}

TEST_CASE("ECE examples") {
    const PredictionSet sure = rows(2, {{1.0, 0.0}, {0.0, 1.0}}, {0, 1});
    CHECK(ece(sure) == 0.0);

    const PredictionSet one = rows(2, {{0.75, 0.25}}, {0});
    CHECK(std::abs(ece(one) - 0.25) < 1e-12);

    const PredictionSet two = rows(2, {{0.6, 0.4}, {0.8, 0.2}}, {0, 1});
    CHECK(std::abs(ece(two, 1) - 0.2) < 1e-12);
}

TEST_CASE("CW-ECE examples") {
    const PredictionSet one = rows(2, {{0.9, 0.1}}, {0});
    CHECK(std::abs(cw_ece(one, 1) - 0.1) < 1e-12);

    // Each class predicted at its empirical frequency.
    const PredictionSet flat = rows(2, {{0.5, 0.5}, {0.5, 0.5}}, {0, 1});
    CHECK(cw_ece(flat) == Approx(0.0));

    sampling::Rng rng(1);
    PredictionSet random(4, ScoreKind::Probabilities);
    for (int i = 0; i < 500; ++i) random.add(sampling::dirichlet(4, rng), i % 4);
    const double v = cw_ece(random);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
}

TEST_CASE("NLL examples") {
    CHECK(nll(rows(2, {{1.0, 0.0}}, {0})) == 0.0);
    CHECK(std::abs(nll(rows(2, {{0.5, 0.5}}, {1})) - std::log(2.0)) < 1e-12);
    const PredictionSet two = rows(2, {{0.5, 0.5}, {0.5, 0.5}}, {0, 1});
    CHECK(std::abs(nll(two) - 2 * std::log(2.0)) < 1e-12);
    CHECK(std::abs(nll(two, Reduction::Mean) - std::log(2.0)) < 1e-12);

    const PredictionSet zero = rows(2, {{1.0, 0.0}}, {1});
    CHECK(std::isinf(nll(zero)));
    CHECK(nll(zero, Reduction::Sum, LogMode::Safe) == Approx(-std::log(1e-12)));
}

TEST_CASE("sum and mean NLL agree") {
    sampling::Rng rng(8);
    PredictionSet set(5, ScoreKind::Probabilities);
    for (int i = 0; i < 300; ++i) set.add(sampling::dirichlet(5, rng), i % 5);
    CHECK(std::abs(nll(set) / 300.0 - nll(set, Reduction::Mean)) < 1e-12);
}

TEST_CASE("KLD examples") {
    const ProbVector p({0.3, 0.7});
    CHECK(kld(p, p) == 0.0);
    CHECK(std::abs(kld(ProbVector({1.0, 0.0}), ProbVector({0.5, 0.5})) - std::log(2.0)) < 1e-12);
    CHECK(std::isinf(kld(ProbVector({0.5, 0.5}), ProbVector({1.0, 0.0}))));
    CHECK_THROWS_AS(kld(p, ProbVector::uniform(3)), DimensionError);
}

TEST_CASE("KLD is non-negative") {
    sampling::Rng rng(13);
    for (int i = 0; i < 10000; ++i) {
        const std::size_t k = 2 + i % 6;
        const std::vector<double> a = sampling::dirichlet(k, rng);
        const std::vector<double> b = sampling::dirichlet(k, rng);
        REQUIRE(kld(a, b) >= 0.0);
        REQUIRE(kld(a, a) <= 1e-12);
    }
}

TEST_CASE("error rate") {
    CHECK(error_rate(rows(2, {{1.0, 0.0}, {0.0, 1.0}}, {0, 1})) == 0.0);
    CHECK(error_rate(rows(2, {{1.0, 0.0}, {0.0, 1.0}}, {1, 0})) == 1.0);
    CHECK(error_rate(rows(2, {{1.0, 0.0}, {1.0, 0.0}}, {0, 1})) == 0.5);
    // tie goes to class 0
    CHECK(error_rate(rows(2, {{0.5, 0.5}}, {1})) == 1.0);
}

TEST_CASE("empty sets and bad bin counts") {
    const PredictionSet empty(3, ScoreKind::Probabilities);
    CHECK_THROWS_AS(ece(empty), EmptyDataError);
    CHECK_THROWS_AS(cw_ece(empty), EmptyDataError);
    CHECK_THROWS_AS(nll(empty), EmptyDataError);
    CHECK_THROWS_AS(error_rate(empty), EmptyDataError);
    CHECK_THROWS_AS(ece(rows(2, {{0.5, 0.5}}, {0}), 0), DomainError);
}

TEST_CASE("bin edges go to the upper bin") {
    CHECK(bin_index(0.0, 10) == 0);
    CHECK(bin_index(0.5, 10) == 5);
    CHECK(bin_index(0.25, 4) == 1);
    CHECK(bin_index(1.0, 10) == 9);
    CHECK(bin_index(0.999, 10) == 9);
}

TEST_CASE("binning report invariants") {
    sampling::Rng rng(21);
    PredictionSet set(3, ScoreKind::Probabilities);
    for (int i = 0; i < 1000; ++i) set.add(sampling::dirichlet(3, rng), i % 3);
    const BinningReport r = bin_reliability(set, 15);
    CHECK(r.n_bins() == 15);
    std::size_t total = 0;
    for (const ReliabilityBin& b : r.bins) total += b.count;
    CHECK(total == 1000);
    CHECK(ece_from_bins(r.bins, r.n) == r.ece);
    CHECK(r.ece == ece(set, 15));
    CHECK(r.ece >= 0.0);
    CHECK(r.ece <= 1.0);
    for (const ReliabilityBin& b : r.bins) {
        if (b.count == 0) {
            CHECK(b.accuracy == 0.0);
            CHECK(b.confidence == 0.0);
        }
    }
}

TEST_CASE("psi leaves the error rate unchanged") {
    sampling::Rng rng(30);
    PredictionSet set(6, ScoreKind::Probabilities);
    for (int i = 0; i < 500; ++i) set.add(sampling::dirichlet(6, rng), i % 6);
    for (double g : {0.5, 2.0, 5.0}) CHECK(error_rate(apply_psi_dataset(set, Gamma(g))) == error_rate(set));
}

TEST_CASE("perfectly calibrated predictor has small ECE") {
    // Labels drawn from the predicted distribution itself.
    sampling::Rng rng(42);
    PredictionSet set(4, ScoreKind::Probabilities);
    for (int i = 0; i < 100000; ++i) {
        const std::vector<double> p = sampling::dirichlet(4, rng);
        std::discrete_distribution<int> draw(p.begin(), p.end());
        set.add(p, draw(rng));
    }
    CHECK(ece(set) < 0.01);
}
