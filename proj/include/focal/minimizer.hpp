#pragma once

// Minimizers of the pointwise conditional focal risk
//
//     W(q; eta) = -sum_y eta_y (1 - q_y)^gamma log q_y   over q on the simplex.
//
// minimize_risk_inverse solves the stationarity condition h(q_i) = c * eta_i
// directly (the inverse of Psi); minimize_risk_pg is an independent projected
// gradient oracle for the same convex program.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "focal/core.hpp"

namespace focal {

struct RiskMinimizerResult {
    ProbVector q_star;
    double risk = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

inline constexpr double kMinimizerTolerance = 1e-10;

double pointwise_risk(const ProbVector& q, const ProbVector& eta, Gamma gamma);

// Inverse of h on [0, 1 - 1e-12] by bisection; values beyond h(1 - 1e-12)
// saturate at the upper end.
double h_inverse(double target, Gamma gamma);

// residual: L-inf distance between Psi(q_star) and eta.
RiskMinimizerResult minimize_risk_inverse(const ProbVector& eta, Gamma gamma,
                                          double tol = kMinimizerTolerance);

// residual: spread of the risk gradient over the support of q_star (zero at a
// KKT point with q_star in the relative interior of the support).
RiskMinimizerResult minimize_risk_pg(const ProbVector& eta, Gamma gamma,
                                     double tol = kMinimizerTolerance, int max_iters = 100000);

// Euclidean projection onto the probability simplex (sort-based).
std::vector<double> project_to_simplex(std::span<const double> x);

enum class CurveTail { UniformTail };

struct CurvePoint {
    double max_eta;
    double max_qstar;
};

// Top risk-minimizer score against top posterior for eta = [m, (1-m)/(k-1), ...],
// with m on an evenly spaced grid strictly inside (1/k, 1).
std::vector<CurvePoint> confidence_curve(std::size_t k, Gamma gamma, std::size_t grid_size,
                                         CurveTail tail = CurveTail::UniformTail);

}  // namespace focal
