#include "focal/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "focal/roots.hpp"

namespace focal {

namespace {

void require_temperature(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw DomainError("temperature must be positive and finite, got " + std::to_string(t));
    }
}

void require_logits(const PredictionSet& preds) {
    if (preds.kind() != ScoreKind::Logits) {
        throw DomainError("temperature scaling works on logit rows");
    }
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.begin(), logits.end());
    const double top = *std::max_element(out.begin(), out.end());
    double total = 0.0;
    for (double& x : out) {
        x = std::exp(x - top);
        total += x;
    }
    for (double& x : out) {
        x /= total;
    }
    return out;
}

ProbVector apply_temperature(std::span<const double> logits, double t) {
    require_temperature(t);
    std::vector<double> scaled(logits.begin(), logits.end());
    for (double& x : scaled) {
        x /= t;
    }
    return ProbVector(softmax(scaled));
}

PredictionSet apply_temperature(const PredictionSet& logits, double t) {
    require_logits(logits);
    require_temperature(t);
    PredictionSet out(logits.k(), ScoreKind::Probabilities);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const ProbVector p = apply_temperature(logits.row(i), t);
        out.add(p.values(), logits.label(i));
    }
    return out;
}

PredictionSet to_logits(const PredictionSet& probabilities) {
    if (probabilities.kind() == ScoreKind::Logits) {
        return probabilities;
    }
    PredictionSet out(probabilities.k(), ScoreKind::Logits);
    std::vector<double> row(probabilities.k());
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const auto p = probabilities.row(i);
        for (std::size_t j = 0; j < p.size(); ++j) {
            row[j] = std::log(std::max(p[j], kLogClamp));
        }
        out.add(row, probabilities.label(i));
    }
    return out;
}

double temperature_objective(const PredictionSet& logits, double t,
                             TemperatureObjective objective, Gamma gamma) {
    require_logits(logits);
    require_temperature(t);
    if (logits.empty()) {
        throw EmptyDataError("temperature objective needs at least one sample");
    }
    const double g = objective == TemperatureObjective::Focal ? gamma.value() : 0.0;
    std::vector<double> scaled(logits.k());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const auto row = logits.row(i);
        double top = -kInfinity;
        for (std::size_t j = 0; j < row.size(); ++j) {
            scaled[j] = row[j] / t;
            top = std::max(top, scaled[j]);
        }
        double sum = 0.0;
        for (double z : scaled) {
            sum += std::exp(z - top);
        }
        const std::size_t y = static_cast<std::size_t>(logits.label(i));
        const double log_p = scaled[y] - top - std::log(sum);
        const double weight = g == 0.0 ? 1.0 : std::pow(-std::expm1(log_p), g);
        total -= weight * log_p;
    }
    return total / static_cast<double>(logits.size());
}

TemperatureFit fit_temperature(const PredictionSet& logits, TemperatureObjective objective,
                               Gamma gamma) {
    require_logits(logits);
    if (logits.empty()) {
        throw EmptyDataError("cannot fit a temperature on an empty set");
    }
    const auto f = [&](double log_t) {
        return temperature_objective(logits, std::exp(log_t), objective, gamma);
    };
    // A t-tolerance of 1e-6 at t <= 100 is met by a log-t bracket of 1e-8.
    const roots::Bracket b =
        roots::golden_minimize(f, std::log(kTemperatureMin), std::log(kTemperatureMax), 1e-8);
    TemperatureFit fit;
    fit.objective = objective;
    fit.gamma = gamma;
    fit.temperature = std::exp(b.mid());
    fit.achieved = temperature_objective(logits, fit.temperature, objective, gamma);
    const double at_one = temperature_objective(logits, 1.0, objective, gamma);
    if (at_one <= fit.achieved) {
        fit.temperature = 1.0;
        fit.achieved = at_one;
    }
    return fit;
}

ProbVector smooth_labels(int y, std::size_t k, double eps) {
    if (k < 2) {
        throw DomainError("label smoothing needs k >= 2");
    }
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
        throw DomainError("label " + std::to_string(y) + " outside [0, k)");
    }
    if (!(eps >= 0.0 && eps < 1.0)) {
        throw DomainError("smoothing epsilon must lie in [0, 1)");
    }
    std::vector<double> v(k, eps / static_cast<double>(k));
    v[static_cast<std::size_t>(y)] += 1.0 - eps;
    return ProbVector(std::move(v));
}

PredictionSet apply_psi_dataset(const PredictionSet& probabilities, Gamma gamma) {
    if (probabilities.kind() != ScoreKind::Probabilities) {
        throw DomainError("Psi is applied to probability rows");
    }
    if (gamma.is_zero()) {
        return probabilities;
    }
    PredictionSet out(probabilities.k(), ScoreKind::Probabilities);
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        out.add(psi_transform(probabilities.row(i), gamma), probabilities.label(i));
    }
    return out;
}

}  // namespace focal
