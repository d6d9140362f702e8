#include "focal/experiment.hpp"

#include <cstdio>

#include "focal/calibrate.hpp"
#include "focal/parallel.hpp"

namespace focal {

namespace {

Predictor panel_predictor(const ExperimentResult& result, const ExperimentConfig& config,
                          const ExperimentPanel& panel) {
    if (panel.model.empty()) {
        return posterior_predictor(config.dist);
    }
    return model_predictor(result.model(panel.model).model, panel.temperature);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (train_n == 0 || val_n == 0 || test_n == 0) {
        throw DomainError("train, validation and test sizes must be positive");
    }
    if (grid.empty()) {
        throw DomainError("panel grid is empty");
    }
    for (double g : focal_gammas) {
        if (!(g > 0.0)) {
            throw DomainError("focal gammas must be positive (gamma 0 is the CE model)");
        }
    }
    train.validate();
}

const TrainedModel& ExperimentResult::model(const std::string& name) const {
    for (const TrainedModel& m : models) {
        if (m.name == name) {
            return m;
        }
    }
    throw DomainError("no model named " + name);
}

const ExperimentPanel& ExperimentResult::panel(const std::string& name) const {
    for (const ExperimentPanel& p : panels) {
        if (p.name == name) {
            return p;
        }
    }
    throw DomainError("no panel named " + name);
}

std::vector<std::vector<double>> ExperimentResult::grid_scores(const ExperimentConfig& config,
                                                               const std::string& name) const {
    const ExperimentPanel& p = panel(name);
    const Predictor predictor = panel_predictor(*this, config, p);
    std::vector<std::vector<double>> rows;
    rows.reserve(config.grid.size());
    for (double x : config.grid) {
        std::vector<double> q = predictor(x);
        rows.push_back(p.psi ? psi_transform(q, *p.psi) : q);
    }
    return rows;
}

std::string model_name(const LossSpec& loss) {
    if (loss.kind == LossSpec::Kind::CrossEntropy) {
        return "ce";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fl%g", loss.gamma.value());
    return buf;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentResult result;
    const std::size_t k = config.dist.k();
    result.train = sample(config.dist, config.train_n, config.data_seed);
    const std::vector<LabeledPoint> val = sample(config.dist, config.val_n, config.val_seed);

    std::vector<LossSpec> losses{LossSpec::cross_entropy()};
    for (double g : config.focal_gammas) {
        losses.push_back(LossSpec::focal(Gamma(g)));
    }
    result.models = parallel_map(losses.size(), [&](std::size_t i) {
        TrainConfig tc = config.train;
        tc.loss = losses[i];
        tc.seed = config.model_seed;
        TrainResult trained = train_mlp(result.train, k, tc);

        PredictionSet logits(k, ScoreKind::Logits);
        for (const LabeledPoint& p : val) {
            logits.add(trained.model.logits(p.x), p.y);
        }
        const double t = fit_temperature(logits, TemperatureObjective::NLL).temperature;
        return TrainedModel{model_name(losses[i]), losses[i], std::move(trained.model),
                            std::move(trained.epoch_loss), t};
    });

    result.panels.push_back({"true", "", 1.0, std::nullopt, {}});
    for (const TrainedModel& m : result.models) {
        result.panels.push_back({m.name, m.name, 1.0, std::nullopt, {}});
        result.panels.push_back({m.name + "_ts", m.name, m.temperature, std::nullopt, {}});
        if (m.loss.kind == LossSpec::Kind::Focal) {
            result.panels.push_back({m.name + "_psi", m.name, 1.0, m.loss.gamma, {}});
        }
    }
    const auto reports = parallel_map(result.panels.size(), [&](std::size_t i) {
        const ExperimentPanel& p = result.panels[i];
        return evaluate_panel(panel_predictor(result, config, p), config.dist, config.grid,
                              config.test_n, config.test_seed, p.psi);
    });
    for (std::size_t i = 0; i < reports.size(); ++i) {
        result.panels[i].report = reports[i];
    }
    return result;
}

}  // namespace focal
