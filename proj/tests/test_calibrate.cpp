#include <doctest.h>

#include <cmath>

#include "focal/calibrate.hpp"
#include "focal/errors.hpp"
#include "focal/sampling.hpp"
#include "focal/synth.hpp"

using namespace focal;
using doctest::Approx;

namespace {

// Logits log(eta(x)) * scale for points drawn from the default mixture.
PredictionSet posterior_logits(double scale, std::size_t n, std::uint64_t seed) {
    const SyntheticDistribution dist = SyntheticDistribution::default_mixture();
    PredictionSet set(dist.k(), ScoreKind::Logits);
    for (const LabeledPoint& p : sample(dist, n, seed)) {
        const ProbVector eta = posterior(dist, p.x);
        std::vector<double> z;
        for (double v : eta.values()) z.push_back(scale * std::log(v));
        set.add(z, p.y);
    }
    return set;
}

}  // namespace

TEST_CASE("softmax and apply_temperature") {
    const ProbVector p = apply_temperature(std::vector<double>{0.0, 0.0}, 1.0);
    CHECK(p[0] == 0.5);
    const ProbVector hot = apply_temperature(std::vector<double>{3.0, -1.0, 0.5}, 1e6);
    for (double v : hot.values()) CHECK(v == Approx(1.0 / 3).epsilon(1e-6));
    const std::vector<double> big = softmax(std::vector<double>{1000.0, 0.0});
    CHECK(big[0] == 1.0);
    CHECK_THROWS_AS(apply_temperature(std::vector<double>{0.0, 1.0}, 0.0), DomainError);
    CHECK_THROWS_AS(apply_temperature(std::vector<double>{0.0, 1.0}, -1.0), DomainError);
}

TEST_CASE("temperature keeps the argmax") {
    sampling::Rng rng(3);
    std::normal_distribution<double> n(0.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> z(5);
        for (double& v : z) v = n(rng);
        for (double t : {0.5, 1.0, 2.0}) CHECK(apply_temperature(z, t).argmax() == argmax(z));
    }
}

TEST_CASE("to_logits inverts softmax up to a constant") {
    PredictionSet p(3, ScoreKind::Probabilities);
    p.add(std::vector<double>{0.2, 0.3, 0.5}, 2);
    p.add(std::vector<double>{1.0, 0.0, 0.0}, 0);
    const PredictionSet back = apply_temperature(to_logits(p), 1.0);
    CHECK(back.row(0)[0] == Approx(0.2).epsilon(1e-14));
    CHECK(back.row(1)[0] == Approx(1.0).epsilon(1e-10));
    CHECK(to_logits(p).row(1)[1] == Approx(std::log(1e-12)));
}

TEST_CASE("fit_temperature recovers the construction") {
    const TemperatureFit one = fit_temperature(posterior_logits(1.0, 20000, 5));
    CHECK(std::abs(one.temperature - 1.0) < 0.05);
    const TemperatureFit two = fit_temperature(posterior_logits(2.0, 20000, 5));
    CHECK(std::abs(two.temperature - 2.0) < 0.1);
}

TEST_CASE("fit_temperature never does worse than t = 1") {
    sampling::Rng rng(17);
    std::normal_distribution<double> n(0.0, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
        PredictionSet set(3, ScoreKind::Logits);
        for (int i = 0; i < 50; ++i) {
            std::vector<double> z(3);
            for (double& v : z) v = n(rng);
            set.add(z, (i * 7 + trial) % 3);
        }
        for (TemperatureObjective o : {TemperatureObjective::NLL, TemperatureObjective::Focal}) {
            const TemperatureFit fit = fit_temperature(set, o, Gamma(2));
            CHECK(fit.achieved <= temperature_objective(set, 1.0, o, Gamma(2)));
            CHECK(fit.temperature >= kTemperatureMin);
            CHECK(fit.temperature <= kTemperatureMax);
        }
    }
}

TEST_CASE("focal temperature objective at gamma 0 is mean NLL") {
    const PredictionSet set = posterior_logits(1.5, 500, 2);
    CHECK(temperature_objective(set, 1.3, TemperatureObjective::Focal, Gamma(0)) ==
          Approx(temperature_objective(set, 1.3, TemperatureObjective::NLL)).epsilon(1e-12));
    const PredictionSet probs = apply_temperature(set, 1.3);
    CHECK(temperature_objective(set, 1.3, TemperatureObjective::NLL) ==
          Approx(nll(probs, Reduction::Mean)).epsilon(1e-10));
}

TEST_CASE("fit_temperature on empty input") {
    CHECK_THROWS_AS(fit_temperature(PredictionSet(2, ScoreKind::Logits)), EmptyDataError);
}

TEST_CASE("smooth_labels") {
    const ProbVector plain = smooth_labels(1, 4, 0.0);
    CHECK(plain == ProbVector::one_hot(4, 1));
    const ProbVector s = smooth_labels(0, 10, 0.1);
    CHECK(s[0] == Approx(0.91).epsilon(1e-15));
    for (std::size_t i = 1; i < 10; ++i) CHECK(s[i] == Approx(0.01).epsilon(1e-15));
    CHECK_THROWS_AS(smooth_labels(4, 4, 0.1), DomainError);
    CHECK_THROWS_AS(smooth_labels(-1, 4, 0.1), DomainError);
    CHECK_THROWS_AS(smooth_labels(0, 4, 1.0), DomainError);
}

TEST_CASE("apply_psi_dataset") {
    sampling::Rng rng(6);
    PredictionSet set(4, ScoreKind::Probabilities);
    for (int i = 0; i < 200; ++i) set.add(sampling::dirichlet(4, rng), i % 4);
    set.add(std::vector<double>{0.5, 0.5, 0.0, 0.0}, 1);
    CHECK(apply_psi_dataset(set, Gamma(0)) == set);
    const PredictionSet out = apply_psi_dataset(set, Gamma(3));
    CHECK(out.labels().size() == set.labels().size());
    for (std::size_t i = 0; i < set.size(); ++i) CHECK(argmax(out.row(i)) == argmax(set.row(i)));
    CHECK(out.row(200)[0] == Approx(0.5).epsilon(1e-15));
    CHECK(out.row(200)[2] == 0.0);
}
