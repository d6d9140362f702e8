#include "focal/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace focal {

Gamma::Gamma(double value) : value_(value) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw DomainError("gamma must be a finite value >= 0, got " + std::to_string(value));
    }
}

ProbVector::ProbVector(std::vector<double> values, double tolerance) : values_(std::move(values)) {
    if (values_.size() < 2) {
        throw DimensionError("a probability vector needs at least 2 classes");
    }
    double sum = 0.0;
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DomainError("probability entry outside [0, 1]: " + std::to_string(v));
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance) {
        throw DomainError("probability entries sum to " + std::to_string(sum) + ", not 1");
    }
}

ProbVector ProbVector::one_hot(std::size_t k, std::size_t index) {
    if (index >= k) {
        throw DomainError("one-hot index out of range");
    }
    std::vector<double> v(k, 0.0);
    v[index] = 1.0;
    return ProbVector(std::move(v));
}

ProbVector ProbVector::uniform(std::size_t k) {
    return ProbVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

double ProbVector::max() const noexcept {
    return *std::max_element(values_.begin(), values_.end());
}

std::size_t ProbVector::argmax() const noexcept { return focal::argmax(values_); }

std::size_t argmax(std::span<const double> values) noexcept {
    // std::max_element returns the first maximum: lowest index wins ties.
    return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

namespace {

void require_same_k(const ProbVector& u, const ProbVector& v) {
    if (u.k() != v.k()) {
        throw DimensionError("class count mismatch: " + std::to_string(u.k()) + " vs " +
                             std::to_string(v.k()));
    }
}

double clamped(double u, LogMode mode) {
    return mode == LogMode::Safe ? std::clamp(u, kLogClamp, 1.0 - kLogClamp) : u;
}

}  // namespace

double focal_loss(const ProbVector& u, const ProbVector& v, Gamma gamma, LogMode mode) {
    require_same_k(u, v);
    const double g = gamma.value();
    double loss = 0.0;
    for (std::size_t i = 0; i < u.k(); ++i) {
        if (v[i] == 0.0) {
            continue;
        }
        const double ui = clamped(u[i], mode);
        if (ui == 0.0) {
            return kInfinity;
        }
        loss -= v[i] * std::pow(1.0 - ui, g) * std::log(ui);
    }
    return loss;
}

double cross_entropy(const ProbVector& u, const ProbVector& v, LogMode mode) {
    return focal_loss(u, v, Gamma{}, mode);
}

double evaluate_loss(const LossSpec& loss, const ProbVector& u, const ProbVector& v, LogMode mode) {
    return focal_loss(u, v, Gamma(loss.effective_gamma()), mode);
}

double varphi(double v, Gamma gamma) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError("varphi is defined on [0, 1], got " + std::to_string(v));
    }
    const double g = gamma.value();
    if (g == 0.0 || v == 0.0) {
        return 1.0;
    }
    if (v == 1.0) {
        return 0.0;
    }
    const double w = 1.0 - v;
    return std::pow(w, g) - g * std::pow(w, g - 1.0) * v * std::log(v);
}

double varphi_derivative(double v, Gamma gamma) {
    if (!(v > 0.0 && v < 1.0)) {
        throw DomainError("varphi derivative is evaluated on (0, 1), got " + std::to_string(v));
    }
    const double g = gamma.value();
    if (g == 0.0) {
        return 0.0;
    }
    const double w = 1.0 - v;
    const double log_v = std::log(v);
    // d/dv (1-v)^g = -g (1-v)^(g-1)
    // d/dv [-g (1-v)^(g-1) v log v] = g (g-1) (1-v)^(g-2) v log v - g (1-v)^(g-1) (log v + 1)
    return -g * std::pow(w, g - 1.0) + g * (g - 1.0) * std::pow(w, g - 2.0) * v * log_v -
           g * std::pow(w, g - 1.0) * (log_v + 1.0);
}

double h_transform(double v, Gamma gamma) {
    if (v == 1.0) {
        throw SingularityError("h(v) is singular at v = 1");
    }
    if (!(v >= 0.0 && v < 1.0)) {
        throw DomainError("h is defined on [0, 1), got " + std::to_string(v));
    }
    if (gamma.is_zero()) {
        return v;
    }
    return v / varphi(v, gamma);
}

std::vector<double> psi_transform(std::span<const double> p, Gamma gamma) {
    std::vector<double> out(p.begin(), p.end());
    if (gamma.is_zero() || p.empty()) {
        return out;
    }
    // One-hot (up to tolerance) keeps its value by convention.
    const std::size_t top = argmax(p);
    const bool one_hot = in_sk(p, kSimplexTolerance) &&
                         std::count_if(p.begin(), p.end(), [&](double x) {
                             return std::abs(x - p[top]) <= kSimplexTolerance;
                         }) == 1;
    if (one_hot) {
        return out;
    }
    double total = 0.0;
    for (double& x : out) {
        x = h_transform(x, gamma);
        total += x;
    }
    for (double& x : out) {
        x /= total;
    }
    return out;
}

ProbVector psi_transform(const ProbVector& p, Gamma gamma) {
    return ProbVector(psi_transform(p.values(), gamma));
}

double recover_binary(double q, Gamma gamma) {
    if (!(q > 0.0 && q < 1.0)) {
        throw DomainError("recover_binary needs q in (0, 1), got " + std::to_string(q));
    }
    const double g = gamma.value();
    const double r = 1.0 - q;
    const double own = std::pow(q, g) / r - g * std::pow(q, g - 1.0) * std::log(r);
    const double other = std::pow(r, g) / q - g * std::pow(r, g - 1.0) * std::log(q);
    return own / (own + other);
}

bool in_sk(std::span<const double> p, double tol) {
    if (p.empty()) {
        return false;
    }
    const double top = *std::max_element(p.begin(), p.end());
    return std::all_of(p.begin(), p.end(), [&](double x) {
        return std::abs(x) <= tol || std::abs(x - top) <= tol;
    });
}

}  // namespace focal
