#include "focal/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

namespace focal {

namespace {

constexpr double kUpperEnd = 1.0 - 1e-12;

void require_same_k(const ProbVector& a, const ProbVector& b) {
    if (a.k() != b.k()) {
        throw DimensionError("class count mismatch: " + std::to_string(a.k()) + " vs " +
                             std::to_string(b.k()));
    }
}

std::vector<std::size_t> support_of(const ProbVector& eta) {
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < eta.k(); ++i) {
        if (eta[i] > 0.0) {
            support.push_back(i);
        }
    }
    return support;
}

// Rebuilds a full-length vector from values on the support; off-support
// classes get exactly zero.
ProbVector scatter(std::size_t k, const std::vector<std::size_t>& support,
                   const std::vector<double>& values) {
    std::vector<double> full(k, 0.0);
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    for (std::size_t j = 0; j < support.size(); ++j) {
        full[support[j]] = values[j] / sum;
    }
    return ProbVector(std::move(full));
}

double linf(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    return worst;
}

// Risk restricted to the support, as used inside the gradient solver.
double support_risk(std::span<const double> q, std::span<const double> eta, double g) {
    double risk = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] <= 0.0) {
            return kInfinity;
        }
        risk -= eta[i] * std::pow(1.0 - q[i], g) * std::log(q[i]);
    }
    return risk;
}

// Gradient of the support risk with its mean removed. Shifting by a constant
// leaves the simplex projection unchanged and keeps the common Lagrange
// multiplier out of the step and slope arithmetic, where it would swamp the
// tangential component with rounding noise.
void support_gradient(std::span<const double> q, std::span<const double> eta, double g,
                      std::span<double> grad) {
    double mean = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double w = 1.0 - q[i];
        const double dpow = g == 0.0 ? 0.0 : g * std::pow(w, g - 1.0) * std::log(q[i]);
        grad[i] = eta[i] * (dpow - std::pow(w, g) / q[i]);
        mean += grad[i];
    }
    mean /= static_cast<double>(q.size());
    for (double& x : grad) {
        x -= mean;
    }
}

double kkt_spread(std::span<const double> grad) {
    const auto [lo, hi] = std::minmax_element(grad.begin(), grad.end());
    return *hi - *lo;
}

}  // namespace

double pointwise_risk(const ProbVector& q, const ProbVector& eta, Gamma gamma) {
    require_same_k(q, eta);
    const double g = gamma.value();
    double risk = 0.0;
    for (std::size_t y = 0; y < q.k(); ++y) {
        if (eta[y] == 0.0) {
            continue;
        }
        if (q[y] == 0.0) {
            return kInfinity;
        }
        risk -= eta[y] * std::pow(1.0 - q[y], g) * std::log(q[y]);
    }
    return risk;
}

double h_inverse(double target, Gamma gamma) {
    if (!(target > 0.0)) {
        return 0.0;
    }
    if (gamma.is_zero()) {
        return std::min(target, kUpperEnd);
    }
    if (target >= h_transform(kUpperEnd, gamma)) {
        return kUpperEnd;
    }
    double lo = 0.0;
    double hi = kUpperEnd;
    for (int it = 0; it < 400; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (h_transform(mid, gamma) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo + 0.5 * (hi - lo);
}

RiskMinimizerResult minimize_risk_inverse(const ProbVector& eta, Gamma gamma, double tol) {
    const std::vector<std::size_t> support = support_of(eta);
    if (support.size() == 1 || gamma.is_zero()) {
        // One-hot eta: W is minimized by putting all mass on that class.
        // gamma == 0: cross-entropy is strictly proper.
        return {eta, pointwise_risk(eta, eta, gamma), 0, 0.0};
    }

    // Equal eta entries share a q value; solve once per distinct value.
    std::vector<double> distinct;
    distinct.reserve(support.size());
    for (std::size_t i : support) {
        distinct.push_back(eta[i]);
    }
    std::sort(distinct.begin(), distinct.end());
    std::vector<std::pair<double, double>> levels;  // (eta value, multiplicity)
    for (double v : distinct) {
        if (!levels.empty() && levels.back().first == v) {
            levels.back().second += 1.0;
        } else {
            levels.emplace_back(v, 1.0);
        }
    }

    const auto mass = [&](double c) {
        double total = 0.0;
        for (const auto& [value, count] : levels) {
            total += count * h_inverse(c * value, gamma);
        }
        return total;
    };

    int iterations = 0;
    double lo = 1.0;
    double hi = 1.0;
    while (mass(hi) < 1.0 && iterations < 2000) {
        lo = hi;
        hi *= 2.0;
        ++iterations;
    }
    while (mass(lo) > 1.0 && iterations < 4000) {
        hi = lo;
        lo *= 0.5;
        ++iterations;
    }
    for (int it = 0; it < 400; ++it, ++iterations) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (mass(mid) < 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double c = lo + 0.5 * (hi - lo);

    std::vector<double> q_support;
    q_support.reserve(support.size());
    for (std::size_t i : support) {
        q_support.push_back(h_inverse(c * eta[i], gamma));
    }
    ProbVector q_star = scatter(eta.k(), support, q_support);

    const double residual = linf(psi_transform(q_star.values(), gamma), eta.values());
    if (!(residual <= tol)) {
        throw ConvergenceError("inverse solver residual " + std::to_string(residual) +
                                   " above tolerance",
                               residual);
    }
    const double risk = pointwise_risk(q_star, eta, gamma);
    return {std::move(q_star), risk, iterations, residual};
}

std::vector<double> project_to_simplex(std::span<const double> x) {
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        cumulative += sorted[j];
        const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (sorted[j] - candidate > 0.0) {
            theta = candidate;
        }
    }
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::max(x[i] - theta, 0.0);
    }
    return out;
}

RiskMinimizerResult minimize_risk_pg(const ProbVector& eta, Gamma gamma, double tol,
                                     int max_iters) {
    const std::vector<std::size_t> support = support_of(eta);
    if (support.size() == 1) {
        return {eta, pointwise_risk(eta, eta, gamma), 0, 0.0};
    }
    const double g = gamma.value();
    constexpr double step0 = 0.5;

    std::vector<double> eta_s;
    for (std::size_t i : support) {
        eta_s.push_back(eta[i]);
    }
    std::vector<double> q = eta_s;
    std::vector<double> grad(q.size());
    std::vector<double> trial(q.size());
    std::vector<double> trial_grad(q.size());
    double risk = support_risk(q, eta_s, g);
    support_gradient(q, eta_s, g, grad);
    double residual = kkt_spread(grad);

    int it = 1;
    for (; it <= max_iters && residual > tol; ++it) {
        double step = step0 / std::sqrt(static_cast<double>(it));
        bool moved = false;
        // Halve the scheduled step until it is a descent step; the log
        // barrier at q_i = 0 makes early full-size steps overshoot.
        for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
            for (std::size_t i = 0; i < q.size(); ++i) {
                trial[i] = q[i] - step * grad[i];
            }
            std::vector<double> projected = project_to_simplex(trial);
            const double trial_risk = support_risk(projected, eta_s, g);
            if (!std::isfinite(trial_risk)) {
                continue;
            }
            // W is convex, so a non-positive slope at the trial point along
            // the step certifies descent even when the two risk values are
            // equal in floating point.
            support_gradient(projected, eta_s, g, trial_grad);
            double slope = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) {
                slope += trial_grad[i] * (projected[i] - q[i]);
            }
            if (trial_risk < risk || slope <= 0.0) {
                moved = projected != q;
                q = std::move(projected);
                risk = trial_risk;
                break;
            }
        }
        support_gradient(q, eta_s, g, grad);
        residual = kkt_spread(grad);
        if (!moved) {
            break;  // no representable descent step is left
        }
    }

    if (!(residual <= tol)) {
        throw ConvergenceError("projected gradient did not converge, KKT spread " +
                                   std::to_string(residual),
                               residual);
    }
    ProbVector q_star = scatter(eta.k(), support, q);
    const double final_risk = pointwise_risk(q_star, eta, gamma);
    return {std::move(q_star), final_risk, it, residual};
}

std::vector<CurvePoint> confidence_curve(std::size_t k, Gamma gamma, std::size_t grid_size,
                                         CurveTail) {
    if (k < 2) {
        throw DomainError("confidence curve needs k >= 2");
    }
    std::vector<CurvePoint> curve;
    curve.reserve(grid_size);
    const double base = 1.0 / static_cast<double>(k);
    for (std::size_t i = 1; i <= grid_size; ++i) {
        const double m = base + (1.0 - base) * static_cast<double>(i) /
                                    static_cast<double>(grid_size + 1);
        std::vector<double> eta(k, (1.0 - m) / static_cast<double>(k - 1));
        eta[0] = m;
        const RiskMinimizerResult r = minimize_risk_inverse(ProbVector(std::move(eta)), gamma);
        curve.push_back({m, r.q_star.max()});
    }
    return curve;
}

}  // namespace focal
