#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "focal/core.hpp"
#include "focal/errors.hpp"
#include "oracles.hpp"

using namespace focal;
using doctest::Approx;

TEST_CASE("ProbVector validation") {
    CHECK_NOTHROW(ProbVector({0.25, 0.75}));
    CHECK_THROWS_AS(ProbVector({1.0}), DimensionError);
    CHECK_THROWS_AS(ProbVector({0.5, 0.4}), DomainError);
    CHECK_THROWS_AS(ProbVector({1.2, -0.2}), DomainError);
    CHECK_THROWS_AS(ProbVector({0.5, std::nan("")}), DomainError);

    const ProbVector u = ProbVector::uniform(4);
    CHECK(u.k() == 4);
    CHECK(u[2] == 0.25);
    CHECK(ProbVector::one_hot(3, 1).argmax() == 1);
    CHECK_THROWS(ProbVector::one_hot(3, 3));
}

TEST_CASE("Gamma rejects negative and non-finite values") {
    CHECK_THROWS_AS(Gamma(-0.1), DomainError);
    CHECK_THROWS_AS(Gamma{std::numeric_limits<double>::infinity()}, DomainError);
    CHECK(Gamma(0.0).is_zero());
    CHECK(Gamma().value() == 0.0);
}

TEST_CASE("argmax breaks ties toward the lowest index") {
    const std::vector<double> v{0.3, 0.35, 0.35};
    CHECK(argmax(v) == 1);
    CHECK(ProbVector({0.5, 0.5}).argmax() == 0);
}

TEST_CASE("focal_loss examples") {
    const ProbVector e1 = ProbVector::one_hot(2, 0);
    const ProbVector half({0.5, 0.5});
    CHECK(focal_loss(e1, e1, Gamma(2)) == 0.0);
    CHECK(focal_loss(half, e1, Gamma(0)) == Approx(0.693147).epsilon(1e-6));
    // (1 - 0.5)^2 * -log 0.5
    CHECK(focal_loss(half, e1, Gamma(2)) == Approx(0.25 * std::log(2.0)).epsilon(1e-14));
    CHECK(focal_loss(half, e1, Gamma(2)) == Approx(0.173287).epsilon(1e-6));
}

TEST_CASE("focal_loss edge cases") {
    const ProbVector e1 = ProbVector::one_hot(2, 0);
    const ProbVector e2 = ProbVector::one_hot(2, 1);
    CHECK(std::isinf(focal_loss(e2, e1, Gamma(1))));
    CHECK(std::isfinite(focal_loss(e2, e1, Gamma(1), LogMode::Safe)));
    CHECK_THROWS_AS(focal_loss(ProbVector::uniform(3), e1, Gamma(1)), DimensionError);
}

TEST_CASE("cross_entropy examples") {
    const ProbVector e1 = ProbVector::one_hot(2, 0);
    CHECK(cross_entropy(e1, e1) == 0.0);
    CHECK(cross_entropy(ProbVector({0.25, 0.75}), ProbVector({0.0, 1.0})) ==
          Approx(-std::log(0.75)).epsilon(1e-14));
    CHECK(cross_entropy(ProbVector({0.25, 0.75}), ProbVector({0.0, 1.0})) ==
          Approx(0.287682).epsilon(1e-6));
    CHECK(cross_entropy(ProbVector({0.5, 0.5}), ProbVector({0.5, 0.5})) ==
          Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("focal loss at gamma 0 is exactly cross-entropy") {
    std::mt19937_64 rng(3);
    std::exponential_distribution<double> e(1.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> a(4), b(4);
        double sa = 0, sb = 0;
        for (int i = 0; i < 4; ++i) {
            sa += a[i] = e(rng);
            sb += b[i] = e(rng);
        }
        for (int i = 0; i < 4; ++i) {
            a[i] /= sa;
            b[i] /= sb;
        }
        const ProbVector u(a), v(b);
        CHECK(focal_loss(u, v, Gamma(0)) == cross_entropy(u, v));
        CHECK(evaluate_loss(LossSpec::focal(Gamma(0)), u, v) ==
              evaluate_loss(LossSpec::cross_entropy(), u, v));
    }
}

TEST_CASE("varphi examples and domain") {
    for (double g : {0.25, 1.0, 3.0}) {
        CHECK(varphi(0.0, Gamma(g)) == 1.0);
        CHECK(varphi(1.0, Gamma(g)) == 0.0);
    }
    // 0.25 - 2 * 0.5 * 0.5 * log 0.5
    CHECK(varphi(0.5, Gamma(2)) == Approx(0.25 + 0.5 * std::log(2.0)).epsilon(1e-14));
    CHECK(varphi(0.5, Gamma(2)) == Approx(0.596574).epsilon(1e-6));
    CHECK(varphi(0.3, Gamma(0)) == 1.0);
    CHECK_THROWS_AS(varphi(-0.1, Gamma(1)), DomainError);
    CHECK_THROWS_AS(varphi(1.1, Gamma(1)), DomainError);
}

TEST_CASE("varphi matches the reference formula") {
    for (double g : {0.02, 0.5, 1.0, 2.5, 10.0}) {
        for (int i = 1; i < 100; ++i) {
            const double v = i / 100.0;
            CHECK(varphi(v, Gamma(g)) ==
                  Approx(static_cast<double>(oracle::phi(v, g))).epsilon(1e-12));
        }
    }
}

TEST_CASE("varphi_derivative agrees with central differences") {
    for (double g : {0.5, 1.0, 3.0}) {
        for (double v : {0.05, 0.2, 0.5, 0.8}) {
            const double d = 1e-6;
            const double fd = static_cast<double>((oracle::phi(v + d, g) - oracle::phi(v - d, g)) / (2 * d));
            CHECK(varphi_derivative(v, Gamma(g)) == Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("h_transform examples") {
    CHECK(h_transform(0.0, Gamma(3)) == 0.0);
    CHECK(h_transform(0.37, Gamma(0)) == 0.37);
    CHECK(h_transform(0.5, Gamma(2)) == Approx(0.5 / (0.25 + 0.5 * std::log(2.0))).epsilon(1e-14));
    CHECK(h_transform(0.5, Gamma(2)) == Approx(0.838119).epsilon(1e-6));
    CHECK_THROWS_AS(h_transform(1.0, Gamma(2)), SingularityError);
}

TEST_CASE("h_transform is strictly increasing") {
    for (double g : {0.25, 1.0, 5.0, 10.0}) {
        double prev = h_transform(1e-4, Gamma(g));
        for (int i = 2; i < 10000; ++i) {
            const double cur = h_transform(i * 1e-4, Gamma(g));
            REQUIRE(cur > prev);
            prev = cur;
        }
    }
}

TEST_CASE("psi_transform examples") {
    const ProbVector p({0.6, 0.3, 0.1});
    CHECK(psi_transform(p, Gamma(0)) == p);
    const ProbVector u = ProbVector::uniform(5);
    const ProbVector pu = psi_transform(u, Gamma(3));
    for (std::size_t i = 0; i < 5; ++i) CHECK(pu[i] == Approx(0.2).epsilon(1e-15));

    const ProbVector b({0.8, 0.2});
    const ProbVector pb = psi_transform(b, Gamma(2));
    CHECK(pb[0] == Approx(recover_binary(0.8, Gamma(2))).epsilon(1e-12));
    CHECK(pb[1] == Approx(1.0 - recover_binary(0.8, Gamma(2))).epsilon(1e-12));
}

TEST_CASE("psi_transform matches the reference and keeps one-hot vectors") {
    const std::vector<double> p{0.55, 0.25, 0.15, 0.05};
    for (double g : {0.5, 1.0, 2.0, 5.0}) {
        const std::vector<double> got = psi_transform(p, Gamma(g));
        const std::vector<double> ref = oracle::psi(p, g);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(got[i] == Approx(ref[i]).epsilon(1e-12));
    }
    const ProbVector e = ProbVector::one_hot(4, 2);
    CHECK(psi_transform(e, Gamma(2)) == e);
    const ProbVector sk({0.5, 0.0, 0.5});
    const ProbVector out = psi_transform(sk, Gamma(2));
    CHECK(out[0] == Approx(0.5).epsilon(1e-15));
    CHECK(out[1] == 0.0);
}

TEST_CASE("psi_transform sums to one and keeps the argmax") {
    std::mt19937_64 rng(11);
    std::exponential_distribution<double> e(1.0);
    for (int t = 0; t < 500; ++t) {
        const std::size_t k = 2 + t % 9;
        std::vector<double> p(k);
        double s = 0;
        for (double& x : p) s += x = e(rng);
        for (double& x : p) x /= s;
        const std::vector<double> q = psi_transform(p, Gamma(0.5 + t % 5));
        CHECK(std::accumulate(q.begin(), q.end(), 0.0) == Approx(1.0).epsilon(1e-12));
        CHECK(argmax(q) == argmax(p));
    }
}

TEST_CASE("recover_binary examples") {
    CHECK(recover_binary(0.8, Gamma(0)) == Approx(0.8).epsilon(1e-15));
    for (double g : {0.5, 1.0, 4.0}) CHECK(recover_binary(0.5, Gamma(g)) == Approx(0.5).epsilon(1e-15));
    const double r = recover_binary(0.8, Gamma(2));
    CHECK(r > 0.8);
    CHECK(r < 1.0);
    // Closed form written out by hand.
    const double q = 0.8, g = 2.0;
    const double own = std::pow(q, g) / (1 - q) - g * std::pow(q, g - 1) * std::log(1 - q);
    const double other = std::pow(1 - q, g) / q - g * std::pow(1 - q, g - 1) * std::log(q);
    CHECK(r == Approx(own / (own + other)).epsilon(1e-14));
    CHECK_THROWS_AS(recover_binary(0.0, Gamma(1)), DomainError);
    CHECK_THROWS_AS(recover_binary(1.0, Gamma(1)), DomainError);
}

TEST_CASE("recover_binary agrees with psi on two classes") {
    for (double g : {0.25, 1.0, 3.0, 7.0}) {
        for (int i = 1; i < 200; ++i) {
            const double q = i / 200.0;
            const std::vector<double> p{q, 1 - q};
            CHECK(std::abs(recover_binary(q, Gamma(g)) - psi_transform(p, Gamma(g))[0]) < 1e-10);
            if (q > 0.5) CHECK(recover_binary(q, Gamma(g)) > q);
        }
    }
}

TEST_CASE("in_sk") {
    CHECK(in_sk(ProbVector::one_hot(3, 0), 1e-9));
    CHECK(in_sk(ProbVector::uniform(3), 1e-9));
    CHECK_FALSE(in_sk(ProbVector({0.7, 0.2, 0.1}), 1e-9));
    CHECK(in_sk(ProbVector({0.5, 0.5, 0.0}), 1e-9));
}
