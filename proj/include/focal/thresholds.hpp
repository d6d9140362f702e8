#pragma once

// Over/under-confidence thresholds of the focal risk minimizer.
//
// tau_oc is the maximizer of phi on (0, 1); tau_uc is the point past the peak
// where phi comes back down to 1. A minimizer whose top score sits at or below
// tau_oc is overconfident, at or above tau_uc underconfident, and in between
// the answer depends on the full score vector (see confidence_direction).

#include "focal/core.hpp"

namespace focal {

inline constexpr double kThresholdTolerance = 1e-10;

struct ThresholdPair {
    Gamma gamma;
    double tau_oc = 0.0;
    double tau_uc = 0.0;
    double tol = 0.0;  // widest final bracket of the two solves
};

enum class ConfidenceRegion { Overconfident, Ambiguous, Underconfident };
enum class ConfidenceDirection { Underconfident, Overconfident, Exact };

const char* to_string(ConfidenceRegion r) noexcept;
const char* to_string(ConfidenceDirection d) noexcept;

double tau_oc(Gamma gamma, double tol = kThresholdTolerance);
double tau_uc(Gamma gamma, double tol = kThresholdTolerance);

// Both thresholds, memoized per (gamma, tol). Safe to call concurrently.
ThresholdPair thresholds(Gamma gamma, double tol = kThresholdTolerance);

ConfidenceRegion region_of(double max_q, Gamma gamma);

// Resolves the ambiguous region pointwise by comparing max p with max Psi(p).
ConfidenceDirection confidence_direction(const ProbVector& p, Gamma gamma);

}  // namespace focal
