#pragma once

// The synthetic 1-D experiment end to end: sample a training set, train one
// MLP per loss, then score raw, temperature-scaled and Psi-corrected outputs
// against the analytic posterior.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "focal/synth.hpp"

namespace focal {

struct ExperimentConfig {
    SyntheticDistribution dist = SyntheticDistribution::default_mixture();
    std::size_t train_n = 10000;
    std::uint64_t data_seed = 1;
    std::uint64_t model_seed = 7;
    std::size_t val_n = 10000;  // temperature-fitting sample
    std::uint64_t val_seed = 3;
    std::size_t test_n = 100000;
    std::uint64_t test_seed = 99;
    std::vector<double> focal_gammas{1.0, 5.0};
    TrainConfig train;  // loss and seed are set per model
    std::vector<double> grid = default_panel_grid();

    void validate() const;
};

struct TrainedModel {
    std::string name;  // "ce", "fl1", "fl5", ...
    LossSpec loss;
    MlpModel model;
    std::vector<double> epoch_loss;
    double temperature = 1.0;  // NLL temperature fit on the validation sample
};

// One scored view of a model (or of the true posterior).
struct ExperimentPanel {
    std::string name;   // "true", "ce", "ce_ts", "fl5", "fl5_ts", "fl5_psi", ...
    std::string model;  // name of the TrainedModel, empty for "true"
    double temperature = 1.0;
    std::optional<Gamma> psi;
    PanelReport report;
};

struct ExperimentResult {
    std::vector<LabeledPoint> train;
    std::vector<TrainedModel> models;
    std::vector<ExperimentPanel> panels;

    const TrainedModel& model(const std::string& name) const;
    const ExperimentPanel& panel(const std::string& name) const;
    // Score rows for a panel on the config's grid.
    std::vector<std::vector<double>> grid_scores(const ExperimentConfig& config,
                                                 const std::string& panel) const;
};

std::string model_name(const LossSpec& loss);

ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace focal
