#pragma once

// Closed-form focal-loss machinery: the losses themselves, the characteristic
// function phi, the monotone score map h, the posterior-recovery transform
// Psi, the binary recovery formula and membership in the fixed-point set S^K.
//
// Class indices are 0-based throughout the C++ API. Ties in argmax are broken
// towards the lowest index, everywhere.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "focal/errors.hpp"

namespace focal {

inline constexpr double kSimplexTolerance = 1e-9;
inline constexpr double kLogClamp = 1e-12;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// How log(0) is treated. Strict surfaces the singularity (+inf losses),
// Safe clamps probabilities into [kLogClamp, 1 - kLogClamp] first.
enum class LogMode { Strict, Safe };

class Gamma {
public:
    constexpr Gamma() = default;
    explicit Gamma(double value);

    constexpr double value() const noexcept { return value_; }
    constexpr bool is_zero() const noexcept { return value_ == 0.0; }

    friend constexpr bool operator==(Gamma, Gamma) = default;

private:
    double value_ = 0.0;
};

// A point on the probability simplex with at least two classes.
class ProbVector {
public:
    explicit ProbVector(std::vector<double> values, double tolerance = kSimplexTolerance);

    static ProbVector one_hot(std::size_t k, std::size_t index);
    static ProbVector uniform(std::size_t k);

    std::size_t k() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    double max() const noexcept;
    std::size_t argmax() const noexcept;

    friend bool operator==(const ProbVector&, const ProbVector&) = default;

private:
    std::vector<double> values_;
};

struct LossSpec {
    enum class Kind { Focal, CrossEntropy };

    Kind kind = Kind::CrossEntropy;
    Gamma gamma{};

    static LossSpec cross_entropy() { return {Kind::CrossEntropy, Gamma{}}; }
    static LossSpec focal(Gamma g) { return {Kind::Focal, g}; }

    // Gamma that actually enters the loss: 0 for cross-entropy.
    double effective_gamma() const noexcept {
        return kind == Kind::CrossEntropy ? 0.0 : gamma.value();
    }
};

std::size_t argmax(std::span<const double> values) noexcept;

// -sum_i v_i (1 - u_i)^gamma log u_i. Terms with v_i == 0 are skipped; an
// exact zero u_i where v_i > 0 yields +inf in strict mode.
double focal_loss(const ProbVector& u, const ProbVector& v, Gamma gamma,
                  LogMode mode = LogMode::Strict);
double cross_entropy(const ProbVector& u, const ProbVector& v,
                     LogMode mode = LogMode::Strict);
double evaluate_loss(const LossSpec& loss, const ProbVector& u, const ProbVector& v,
                     LogMode mode = LogMode::Strict);

// phi(v) = (1 - v)^gamma - gamma (1 - v)^(gamma - 1) v log v on [0, 1], with
// the endpoint limits phi(0) = 1 and phi(1) = 0 (gamma > 0).
double varphi(double v, Gamma gamma);

// d phi / dv on (0, 1).
double varphi_derivative(double v, Gamma gamma);

// h(v) = v / phi(v) on [0, 1). Strictly increasing, h(0) = 0.
double h_transform(double v, Gamma gamma);

// Psi(v)_i = h(v_i) / sum_l h(v_l). Identity for gamma == 0 and for one-hot
// inputs. The span overload skips simplex validation; it is what dataset-level
// code uses on rows that were accepted at a looser file tolerance.
ProbVector psi_transform(const ProbVector& p, Gamma gamma);
std::vector<double> psi_transform(std::span<const double> p, Gamma gamma);

// Posterior of the class scored q in a two-class problem, straight from the
// stationarity condition of the binary focal risk.
double recover_binary(double q, Gamma gamma);

// True iff every entry is within tol of 0 or of max(p).
bool in_sk(std::span<const double> p, double tol);
inline bool in_sk(const ProbVector& p, double tol) { return in_sk(p.values(), tol); }

}  // namespace focal
