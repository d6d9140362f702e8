#pragma once

// Synthetic 1-D K-class experiment: a Gaussian mixture with a known class
// posterior, a two-hidden-layer ReLU MLP trained with cross-entropy or focal
// loss by minibatch SGD with momentum, and the ERR / KLD / ECE panel.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "focal/core.hpp"
#include "focal/metrics.hpp"

namespace focal {

struct MixtureComponent {
    double prior = 0.0;
    double mean = 0.0;
    double stddev = 1.0;
};

class SyntheticDistribution {
public:
    explicit SyntheticDistribution(std::vector<MixtureComponent> components);

    // K = 3, priors (0.35, 0.35, 0.30), means (-2, 0, 2), unit variances.
    static SyntheticDistribution default_mixture();

    std::size_t k() const noexcept { return components_.size(); }
    const std::vector<MixtureComponent>& components() const noexcept { return components_; }

    // p(x) and p(x, y).
    double density(double x) const;
    double joint_density(double x, std::size_t y) const;

private:
    std::vector<MixtureComponent> components_;
};

struct LabeledPoint {
    double x = 0.0;
    int y = 0;

    friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

// eta_y(x) = pi_y N(x; mu_y, sigma_y) / sum_l pi_l N(x; mu_l, sigma_l),
// evaluated in log space so it stays a valid simplex far in the tails.
ProbVector posterior(const SyntheticDistribution& dist, double x);

std::vector<LabeledPoint> sample(const SyntheticDistribution& dist, std::size_t n,
                                 std::uint64_t seed);

struct TrainConfig {
    LossSpec loss = LossSpec::cross_entropy();
    int epochs = 50;
    std::size_t batch_size = 64;
    double learning_rate = 0.01;
    double momentum = 0.9;
    double weight_decay = 1e-3;
    std::size_t hidden = 64;
    std::uint64_t seed = 0;

    void validate() const;
};

// input(1) -> hidden -> hidden -> output(k), ReLU activations, softmax head.
class MlpModel {
public:
    // Weights and biases drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    MlpModel(std::size_t k, std::size_t hidden, std::uint64_t seed);

    std::size_t k() const noexcept { return k_; }
    std::size_t hidden() const noexcept { return hidden_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::span<double> parameters() noexcept { return params_; }
    std::span<const double> parameters() const noexcept { return params_; }

    std::vector<double> logits(double x) const;
    ProbVector predict(double x) const;

    // Loss of one sample; adds d loss / d params into grad.
    double accumulate_gradient(double x, int y, const LossSpec& loss,
                               std::span<double> grad) const;

    // ReLU on/off pattern of both hidden layers at x.
    std::vector<bool> activation_pattern(double x) const;

    void save(std::ostream& out) const;
    static MlpModel load(std::istream& in);

    friend bool operator==(const MlpModel&, const MlpModel&) = default;

private:
    struct Forward {
        std::vector<double> z1, a1, z2, a2, logits;
    };
    Forward forward(double x) const;

    std::size_t w1() const { return 0; }
    std::size_t b1() const { return hidden_; }
    std::size_t w2() const { return 2 * hidden_; }
    std::size_t b2() const { return 2 * hidden_ + hidden_ * hidden_; }
    std::size_t w3() const { return 3 * hidden_ + hidden_ * hidden_; }
    std::size_t b3() const { return 3 * hidden_ + hidden_ * hidden_ + k_ * hidden_; }

    std::size_t k_ = 0;
    std::size_t hidden_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> params_;
};

// Loss of softmax(logits) against class y and its gradient w.r.t. the logits:
// with u = softmax(z), s = 1 - u_y and g = gamma,
//   d loss / d u_y = g s^(g-1) log u_y - s^g / u_y,
//   d u_y / d z_j  = u_y (delta_yj - u_j).
// gamma == 0 (and cross-entropy) uses the simplified u - e_y form.
double loss_and_logit_gradient(std::span<const double> logits, int y, const LossSpec& loss,
                               std::span<double> grad);

struct TrainResult {
    MlpModel model;
    std::vector<double> epoch_loss;  // mean training loss per epoch
};

TrainResult train_mlp(std::span<const LabeledPoint> data, std::size_t k,
                      const TrainConfig& config);

// Max relative error |a - n| / max(|a| + |n|, 1e-6) between the analytic
// parameter gradient and central differences with step 1e-5. Parameters
// whose perturbation flips a ReLU are skipped, since the loss is not
// differentiable across the kink.
double grad_check(const MlpModel& model, const LossSpec& loss, const LabeledPoint& sample);

using Predictor = std::function<std::vector<double>(double)>;

Predictor model_predictor(const MlpModel& model, double temperature = 1.0);
Predictor posterior_predictor(const SyntheticDistribution& dist);

struct PanelReport {
    double err = 0.0;
    double kld = 0.0;
    double ece = 0.0;
};

PredictionSet predict_set(const Predictor& predictor, std::span<const LabeledPoint> data,
                          std::size_t k, std::optional<Gamma> psi = std::nullopt);

// ERR and ECE (10 bins) on a fresh test sample of size test_n drawn with
// test_seed; KLD(eta(x) || q(x)) averaged over the grid. With psi set, scores
// pass through Psi before every metric.
PanelReport evaluate_panel(const Predictor& predictor, const SyntheticDistribution& dist,
                           std::span<const double> grid, std::size_t test_n,
                           std::uint64_t test_seed, std::optional<Gamma> psi = std::nullopt);

std::vector<double> linear_grid(double lo, double hi, std::size_t n);

// The grid used by the panel unless the caller overrides it.
std::vector<double> default_panel_grid();

}  // namespace focal
