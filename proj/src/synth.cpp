#include "focal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "focal/calibrate.hpp"

namespace focal {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double log_normal_pdf(double x, double mean, double stddev) {
    const double z = (x - mean) / stddev;
    return -0.5 * z * z - std::log(stddev) - kLogSqrt2Pi;
}

}  // namespace

// ---------------------------------------------------------------------------
// Distribution

SyntheticDistribution::SyntheticDistribution(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
    if (components_.size() < 2) {
        throw DimensionError("mixture needs at least two classes");
    }
    double total = 0.0;
    for (const MixtureComponent& c : components_) {
        if (!(c.prior > 0.0 && c.prior < 1.0)) {
            throw DomainError("mixture priors must lie in (0, 1)");
        }
        if (!(c.stddev > 0.0) || !std::isfinite(c.mean)) {
            throw DomainError("mixture components need finite means and positive stddevs");
        }
        total += c.prior;
    }
    if (std::abs(total - 1.0) > kSimplexTolerance) {
        throw DomainError("mixture priors sum to " + std::to_string(total));
    }
}

SyntheticDistribution SyntheticDistribution::default_mixture() {
    return SyntheticDistribution({{0.35, -2.0, 1.0}, {0.35, 0.0, 1.0}, {0.30, 2.0, 1.0}});
}

double SyntheticDistribution::joint_density(double x, std::size_t y) const {
    const MixtureComponent& c = components_.at(y);
    return c.prior * std::exp(log_normal_pdf(x, c.mean, c.stddev));
}

double SyntheticDistribution::density(double x) const {
    double total = 0.0;
    for (std::size_t y = 0; y < k(); ++y) {
        total += joint_density(x, y);
    }
    return total;
}

ProbVector posterior(const SyntheticDistribution& dist, double x) {
    if (!std::isfinite(x)) {
        throw DomainError("posterior needs a finite x");
    }
    std::vector<double> log_joint;
    log_joint.reserve(dist.k());
    for (const MixtureComponent& c : dist.components()) {
        log_joint.push_back(std::log(c.prior) + log_normal_pdf(x, c.mean, c.stddev));
    }
    return ProbVector(softmax(log_joint));
}

std::vector<LabeledPoint> sample(const SyntheticDistribution& dist, std::size_t n,
                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> priors;
    for (const MixtureComponent& c : dist.components()) {
        priors.push_back(c.prior);
    }
    std::discrete_distribution<int> pick(priors.begin(), priors.end());
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<LabeledPoint> out(n);
    for (LabeledPoint& p : out) {
        p.y = pick(rng);
        const MixtureComponent& c = dist.components()[static_cast<std::size_t>(p.y)];
        p.x = c.mean + c.stddev * unit(rng);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model

void TrainConfig::validate() const {
    if (epochs <= 0 || batch_size == 0 || hidden == 0) {
        throw DomainError("epochs, batch size and hidden width must be positive");
    }
    if (!(learning_rate > 0.0) || !(weight_decay >= 0.0)) {
        throw DomainError("learning rate must be positive and weight decay non-negative");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw DomainError("momentum must lie in [0, 1)");
    }
}

MlpModel::MlpModel(std::size_t k, std::size_t hidden, std::uint64_t seed)
    : k_(k), hidden_(hidden), seed_(seed) {
    if (k < 2 || hidden == 0) {
        throw DimensionError("MLP needs k >= 2 and a positive hidden width");
    }
    params_.resize(b3() + k_);
    std::mt19937_64 rng(seed);
    const auto fill = [&](std::size_t begin, std::size_t count, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (std::size_t i = 0; i < count; ++i) {
            params_[begin + i] = u(rng);
        }
    };
    fill(w1(), hidden_, 1);
    fill(b1(), hidden_, 1);
    fill(w2(), hidden_ * hidden_, hidden_);
    fill(b2(), hidden_, hidden_);
    fill(w3(), k_ * hidden_, hidden_);
    fill(b3(), k_, hidden_);
}

MlpModel::Forward MlpModel::forward(double x) const {
    Forward f;
    f.z1.resize(hidden_);
    f.a1.resize(hidden_);
    for (std::size_t i = 0; i < hidden_; ++i) {
        f.z1[i] = params_[w1() + i] * x + params_[b1() + i];
        f.a1[i] = std::max(f.z1[i], 0.0);
    }
    f.z2.resize(hidden_);
    f.a2.resize(hidden_);
    for (std::size_t i = 0; i < hidden_; ++i) {
        const double* w = &params_[w2() + i * hidden_];
        double z = params_[b2() + i];
        for (std::size_t j = 0; j < hidden_; ++j) {
            z += w[j] * f.a1[j];
        }
        f.z2[i] = z;
        f.a2[i] = std::max(z, 0.0);
    }
    f.logits.resize(k_);
    for (std::size_t c = 0; c < k_; ++c) {
        const double* w = &params_[w3() + c * hidden_];
        double z = params_[b3() + c];
        for (std::size_t j = 0; j < hidden_; ++j) {
            z += w[j] * f.a2[j];
        }
        f.logits[c] = z;
    }
    return f;
}

std::vector<double> MlpModel::logits(double x) const { return forward(x).logits; }

ProbVector MlpModel::predict(double x) const { return ProbVector(softmax(forward(x).logits)); }

std::vector<bool> MlpModel::activation_pattern(double x) const {
    const Forward f = forward(x);
    std::vector<bool> pattern;
    pattern.reserve(2 * hidden_);
    for (double z : f.z1) {
        pattern.push_back(z > 0.0);
    }
    for (double z : f.z2) {
        pattern.push_back(z > 0.0);
    }
    return pattern;
}

double MlpModel::accumulate_gradient(double x, int y, const LossSpec& loss,
                                     std::span<double> grad) const {
    const Forward f = forward(x);
    std::vector<double> dz3(k_);
    const double value = loss_and_logit_gradient(f.logits, y, loss, dz3);

    std::vector<double> dz2(hidden_, 0.0);
    for (std::size_t c = 0; c < k_; ++c) {
        const double* w = &params_[w3() + c * hidden_];
        double* gw = &grad[w3() + c * hidden_];
        for (std::size_t j = 0; j < hidden_; ++j) {
            gw[j] += dz3[c] * f.a2[j];
            dz2[j] += w[j] * dz3[c];
        }
        grad[b3() + c] += dz3[c];
    }
    for (std::size_t i = 0; i < hidden_; ++i) {
        if (f.z2[i] <= 0.0) {
            dz2[i] = 0.0;
        }
    }

    std::vector<double> dz1(hidden_, 0.0);
    for (std::size_t i = 0; i < hidden_; ++i) {
        if (dz2[i] == 0.0) {
            continue;
        }
        const double* w = &params_[w2() + i * hidden_];
        double* gw = &grad[w2() + i * hidden_];
        for (std::size_t j = 0; j < hidden_; ++j) {
            gw[j] += dz2[i] * f.a1[j];
            dz1[j] += w[j] * dz2[i];
        }
        grad[b2() + i] += dz2[i];
    }
    for (std::size_t i = 0; i < hidden_; ++i) {
        if (f.z1[i] <= 0.0) {
            continue;
        }
        grad[w1() + i] += dz1[i] * x;
        grad[b1() + i] += dz1[i];
    }
    return value;
}

void MlpModel::save(std::ostream& out) const {
    out << "mlp " << k_ << ' ' << hidden_ << ' ' << seed_ << '\n';
    out << std::setprecision(17);
    for (std::size_t i = 0; i < params_.size(); ++i) {
        out << params_[i] << (i + 1 == params_.size() ? '\n' : ' ');
    }
}

MlpModel MlpModel::load(std::istream& in) {
    std::string tag;
    std::size_t k = 0;
    std::size_t hidden = 0;
    std::uint64_t seed = 0;
    if (!(in >> tag >> k >> hidden >> seed) || tag != "mlp") {
        throw ParseError("not an MLP model file", 1);
    }
    MlpModel model(k, hidden, seed);
    for (double& p : model.params_) {
        if (!(in >> p)) {
            throw ParseError("truncated MLP parameter list", 2);
        }
    }
    return model;
}

double loss_and_logit_gradient(std::span<const double> logits, int y, const LossSpec& loss,
                               std::span<double> grad) {
    const std::size_t k = logits.size();
    const std::size_t label = static_cast<std::size_t>(y);
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        grad[j] = std::exp(logits[j] - top);
        sum += grad[j];
    }
    for (std::size_t j = 0; j < k; ++j) {
        grad[j] /= sum;  // grad holds u = softmax(z) for now
    }
    const double log_u = logits[label] - top - std::log(sum);
    const double g = loss.effective_gamma();

    if (g == 0.0) {
        grad[label] -= 1.0;
        return -log_u;
    }

    const double u_y = grad[label];
    // 1 - u_y from the other classes keeps precision when u_y is near 1.
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (j != label) {
            s += grad[j];
        }
    }
    const double value = -std::pow(s, g) * log_u;
    if (s == 0.0) {
        std::fill(grad.begin(), grad.end(), 0.0);
        return value;
    }
    // (d loss / d u_y) * u_y, so that d loss / d z_j = coeff * (delta_yj - u_j).
    const double coeff = g * std::pow(s, g - 1.0) * log_u * u_y - std::pow(s, g);
    for (std::size_t j = 0; j < k; ++j) {
        const double delta = j == label ? 1.0 : 0.0;
        grad[j] = coeff * (delta - grad[j]);
    }
    return value;
}

// ---------------------------------------------------------------------------
// Training

TrainResult train_mlp(std::span<const LabeledPoint> data, std::size_t k,
                      const TrainConfig& config) {
    config.validate();
    if (data.empty()) {
        throw EmptyDataError("training needs at least one sample");
    }
    for (const LabeledPoint& p : data) {
        if (p.y < 0 || static_cast<std::size_t>(p.y) >= k || !std::isfinite(p.x)) {
            throw DomainError("training sample with invalid label or non-finite x");
        }
    }

    TrainResult result{MlpModel(k, config.hidden, config.seed), {}};
    MlpModel& model = result.model;
    std::span<double> params = model.parameters();
    std::vector<double> grad(params.size());
    std::vector<double> velocity(params.size(), 0.0);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(start + config.batch_size, order.size());
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t b = start; b < stop; ++b) {
                const LabeledPoint& p = data[order[b]];
                epoch_loss += model.accumulate_gradient(p.x, p.y, config.loss, grad);
            }
            const double scale = 1.0 / static_cast<double>(stop - start);
            for (std::size_t i = 0; i < params.size(); ++i) {
                const double g = grad[i] * scale + config.weight_decay * params[i];
                velocity[i] = config.momentum * velocity[i] + g;
                params[i] -= config.learning_rate * velocity[i];
            }
        }
        epoch_loss /= static_cast<double>(data.size());
        if (!std::isfinite(epoch_loss)) {
            throw DivergenceError("training loss became non-finite in epoch " +
                                      std::to_string(epoch),
                                  epoch);
        }
        result.epoch_loss.push_back(epoch_loss);
    }
    return result;
}

double grad_check(const MlpModel& model, const LossSpec& loss, const LabeledPoint& sample) {
    constexpr double step = 1e-5;
    constexpr double floor = 1e-6;

    std::vector<double> analytic(model.parameters().size(), 0.0);
    model.accumulate_gradient(sample.x, sample.y, loss, analytic);
    const std::vector<bool> base_pattern = model.activation_pattern(sample.x);

    MlpModel probe = model;
    std::vector<double> scratch(model.parameters().size());
    const auto loss_at = [&](const MlpModel& m) {
        return m.accumulate_gradient(sample.x, sample.y, loss, scratch);
    };

    double worst = 0.0;
    std::span<double> params = probe.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + step;
        const bool up_same = probe.activation_pattern(sample.x) == base_pattern;
        const double up = loss_at(probe);
        params[i] = saved - step;
        const bool down_same = probe.activation_pattern(sample.x) == base_pattern;
        const double down = loss_at(probe);
        params[i] = saved;
        if (!up_same || !down_same) {
            continue;
        }
        const double numeric = (up - down) / (2.0 * step);
        const double denom = std::max(std::abs(analytic[i]) + std::abs(numeric), floor);
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Evaluation

Predictor model_predictor(const MlpModel& model, double temperature) {
    return [model, temperature](double x) {
        std::vector<double> z = model.logits(x);
        if (temperature != 1.0) {
            for (double& v : z) {
                v /= temperature;
            }
        }
        return softmax(z);
    };
}

Predictor posterior_predictor(const SyntheticDistribution& dist) {
    return [dist](double x) {
        const ProbVector p = posterior(dist, x);
        return std::vector<double>(p.values().begin(), p.values().end());
    };
}

PredictionSet predict_set(const Predictor& predictor, std::span<const LabeledPoint> data,
                          std::size_t k, std::optional<Gamma> psi) {
    PredictionSet set(k, ScoreKind::Probabilities);
    for (const LabeledPoint& p : data) {
        std::vector<double> q = predictor(p.x);
        if (psi) {
            q = psi_transform(q, *psi);
        }
        set.add(q, p.y);
    }
    return set;
}

PanelReport evaluate_panel(const Predictor& predictor, const SyntheticDistribution& dist,
                           std::span<const double> grid, std::size_t test_n,
                           std::uint64_t test_seed, std::optional<Gamma> psi) {
    PanelReport report;
    const std::vector<LabeledPoint> test = sample(dist, test_n, test_seed);
    const PredictionSet set = predict_set(predictor, test, dist.k(), psi);
    report.err = error_rate(set);
    report.ece = ece(set, 10);

    double total = 0.0;
    for (double x : grid) {
        std::vector<double> q = predictor(x);
        if (psi) {
            q = psi_transform(q, *psi);
        }
        total += kld(posterior(dist, x).values(), q);
    }
    report.kld = grid.empty() ? 0.0 : total / static_cast<double>(grid.size());
    return report;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return grid;
}

std::vector<double> default_panel_grid() { return linear_grid(-5.0, 5.0, 201); }

}  // namespace focal
