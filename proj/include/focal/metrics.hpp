#pragma once

// Calibration and classification metrics over a labelled set of score rows.

#include <cstddef>
#include <span>
#include <vector>

#include "focal/core.hpp"

namespace focal {

// Rows read from files are accepted at this looser simplex tolerance.
inline constexpr double kRowTolerance = 1e-6;

enum class ScoreKind { Probabilities, Logits };

// Row-major n x k scores with 0-based labels.
class PredictionSet {
public:
    PredictionSet(std::size_t k, ScoreKind kind);
    PredictionSet(std::size_t k, ScoreKind kind, std::vector<double> scores,
                  std::vector<int> labels);

    void add(std::span<const double> row, int label);

    std::size_t k() const noexcept { return k_; }
    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    ScoreKind kind() const noexcept { return kind_; }

    std::span<const double> row(std::size_t i) const {
        return {scores_.data() + i * k_, k_};
    }
    int label(std::size_t i) const { return labels_[i]; }
    std::span<const double> scores() const noexcept { return scores_; }
    std::span<const int> labels() const noexcept { return labels_; }

    friend bool operator==(const PredictionSet&, const PredictionSet&) = default;

private:
    std::size_t k_;
    ScoreKind kind_;
    std::vector<double> scores_;
    std::vector<int> labels_;
};

struct ReliabilityBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
    double accuracy = 0.0;    // 0 for empty bins
    double confidence = 0.0;  // 0 for empty bins
};

struct BinningReport {
    std::vector<ReliabilityBin> bins;
    std::size_t n = 0;
    double ece = 0.0;

    std::size_t n_bins() const noexcept { return bins.size(); }
};

// (1/n) sum_j |B_j| |acc_j - conf_j|, the exact expression bin_reliability uses.
double ece_from_bins(std::span<const ReliabilityBin> bins, std::size_t n);

// Index of the equal-width bin that holds confidence c: floor(c * n_bins),
// so a confidence on an interior edge lands in the upper bin and c == 1 stays
// in the top bin.
std::size_t bin_index(double confidence, std::size_t n_bins);

BinningReport bin_reliability(const PredictionSet& preds, std::size_t n_bins = 10);
double ece(const PredictionSet& preds, std::size_t n_bins = 10);
double cw_ece(const PredictionSet& preds, std::size_t n_bins = 10);

enum class Reduction { Sum, Mean };

double nll(const PredictionSet& preds, Reduction reduction = Reduction::Sum,
           LogMode mode = LogMode::Strict);

// sum_i p_i log(p_i / q_i); +inf when p_i > 0 meets q_i == 0.
double kld(std::span<const double> p, std::span<const double> q);
inline double kld(const ProbVector& p, const ProbVector& q) { return kld(p.values(), q.values()); }

// Fraction of rows whose argmax (lowest index on ties) differs from the label.
// Works on probability and logit rows alike.
double error_rate(const PredictionSet& preds);

}  // namespace focal
