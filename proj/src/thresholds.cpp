#include "focal/thresholds.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <utility>

#include "focal/roots.hpp"

namespace focal {

namespace {

constexpr double kLowerEnd = 1e-12;

void require_positive(Gamma gamma) {
    if (gamma.is_zero()) {
        throw DegenerateError("thresholds are undefined for gamma = 0 (phi is constant)");
    }
}

void require_tolerance(double tol) {
    if (!(tol > 0.0)) {
        throw DomainError("solver tolerance must be positive");
    }
}

// phi rises then falls on (0, 1), so its derivative changes sign exactly once.
roots::Bracket solve_tau_oc(Gamma gamma, double tol) {
    return roots::bisect([&](double v) { return -varphi_derivative(v, gamma); },
                         kLowerEnd, 0.5, tol);
}

// On [tau_oc, 0.5] phi decreases from above 1 to below 1.
roots::Bracket solve_tau_uc(Gamma gamma, double tol, double oc) {
    return roots::bisect([&](double v) { return varphi(v, gamma) - 1.0; }, oc, 0.5, tol);
}

}  // namespace

const char* to_string(ConfidenceRegion r) noexcept {
    switch (r) {
        case ConfidenceRegion::Overconfident: return "overconfident";
        case ConfidenceRegion::Ambiguous: return "ambiguous";
        case ConfidenceRegion::Underconfident: return "underconfident";
    }
    return "?";
}

const char* to_string(ConfidenceDirection d) noexcept {
    switch (d) {
        case ConfidenceDirection::Underconfident: return "UC";
        case ConfidenceDirection::Overconfident: return "OC";
        case ConfidenceDirection::Exact: return "exact";
    }
    return "?";
}

double tau_oc(Gamma gamma, double tol) {
    return thresholds(gamma, tol).tau_oc;
}

double tau_uc(Gamma gamma, double tol) {
    return thresholds(gamma, tol).tau_uc;
}

ThresholdPair thresholds(Gamma gamma, double tol) {
    require_positive(gamma);
    require_tolerance(tol);

    static std::shared_mutex mutex;
    static std::map<std::pair<double, double>, ThresholdPair> cache;
    const auto key = std::make_pair(gamma.value(), tol);
    {
        std::shared_lock lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) {
            return it->second;
        }
    }

    const roots::Bracket oc = solve_tau_oc(gamma, tol);
    ThresholdPair pair;
    pair.gamma = gamma;
    pair.tau_oc = oc.mid();
    const roots::Bracket uc = solve_tau_uc(gamma, tol, pair.tau_oc);
    pair.tau_uc = uc.mid();
    pair.tol = std::max(oc.width(), uc.width());

    std::unique_lock lock(mutex);
    cache.emplace(key, pair);
    return pair;
}

ConfidenceRegion region_of(double max_q, Gamma gamma) {
    if (!(max_q > 0.0 && max_q < 1.0)) {
        throw DomainError("max confidence must lie in (0, 1), got " + std::to_string(max_q));
    }
    const ThresholdPair t = thresholds(gamma);
    if (max_q <= t.tau_oc) {
        return ConfidenceRegion::Overconfident;
    }
    if (max_q >= t.tau_uc) {
        return ConfidenceRegion::Underconfident;
    }
    return ConfidenceRegion::Ambiguous;
}

ConfidenceDirection confidence_direction(const ProbVector& p, Gamma gamma) {
    constexpr double margin = 1e-12;
    const double raw = p.max();
    const double recovered = psi_transform(p, gamma).max();
    if (raw < recovered - margin) {
        return ConfidenceDirection::Underconfident;
    }
    if (raw > recovered + margin) {
        return ConfidenceDirection::Overconfident;
    }
    return ConfidenceDirection::Exact;
}

}  // namespace focal
