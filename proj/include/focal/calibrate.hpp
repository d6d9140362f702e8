#pragma once

// Post-hoc calibration operators: temperature scaling, label smoothing and
// dataset-wide application of the Psi transform. The operators are
// independent and may be chained in either order.

#include <cstddef>
#include <span>
#include <vector>

#include "focal/core.hpp"
#include "focal/metrics.hpp"

namespace focal {

enum class TemperatureObjective { NLL, Focal };

struct TemperatureFit {
    double temperature = 1.0;
    TemperatureObjective objective = TemperatureObjective::NLL;
    Gamma gamma{};
    double achieved = 0.0;  // mean objective at the fitted temperature
};

inline constexpr double kTemperatureMin = 0.01;
inline constexpr double kTemperatureMax = 100.0;
inline constexpr double kTemperatureTolerance = 1e-6;

std::vector<double> softmax(std::span<const double> logits);

ProbVector apply_temperature(std::span<const double> logits, double t);
PredictionSet apply_temperature(const PredictionSet& logits, double t);

// log(max(p, 1e-12)); softmax of the result gives back p (up to the clamp).
PredictionSet to_logits(const PredictionSet& probabilities);

// Mean NLL or mean focal loss of softmax(logits / t) against the labels.
double temperature_objective(const PredictionSet& logits, double t,
                             TemperatureObjective objective, Gamma gamma = Gamma{});

// Golden-section search on log t over [0.01, 100]. Never returns a
// temperature that does worse than t = 1.
TemperatureFit fit_temperature(const PredictionSet& logits,
                               TemperatureObjective objective = TemperatureObjective::NLL,
                               Gamma gamma = Gamma{});

// (1 - eps) e_y + eps / k.
ProbVector smooth_labels(int y, std::size_t k, double eps);

PredictionSet apply_psi_dataset(const PredictionSet& probabilities, Gamma gamma);

}  // namespace focal
