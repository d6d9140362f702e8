#include "focal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace focal {

namespace {

void require_nonempty(const PredictionSet& preds) {
    if (preds.empty()) {
        throw EmptyDataError("metric needs at least one sample");
    }
}

void require_probabilities(const PredictionSet& preds) {
    if (preds.kind() != ScoreKind::Probabilities) {
        throw DomainError("metric needs probability rows, got logits");
    }
}

void require_bins(std::size_t n_bins) {
    if (n_bins < 1) {
        throw DomainError("need at least one bin");
    }
}

}  // namespace

PredictionSet::PredictionSet(std::size_t k, ScoreKind kind) : k_(k), kind_(kind) {
    if (k < 2) {
        throw DimensionError("prediction set needs k >= 2");
    }
}

PredictionSet::PredictionSet(std::size_t k, ScoreKind kind, std::vector<double> scores,
                             std::vector<int> labels)
    : PredictionSet(k, kind) {
    if (scores.size() != labels.size() * k) {
        throw DimensionError("score buffer does not hold labels.size() rows of k entries");
    }
    scores_.reserve(scores.size());
    labels_.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        add(std::span<const double>(scores).subspan(i * k, k), labels[i]);
    }
}

void PredictionSet::add(std::span<const double> row, int label) {
    if (row.size() != k_) {
        throw DimensionError("row has " + std::to_string(row.size()) + " scores, expected " +
                             std::to_string(k_));
    }
    if (label < 0 || static_cast<std::size_t>(label) >= k_) {
        throw DomainError("label " + std::to_string(label) + " outside [0, k)");
    }
    if (kind_ == ScoreKind::Probabilities) {
        double sum = 0.0;
        for (double v : row) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw DomainError("probability entry outside [0, 1]");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kRowTolerance) {
            throw DomainError("probability row sums to " + std::to_string(sum));
        }
    } else {
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw DomainError("non-finite logit");
            }
        }
    }
    scores_.insert(scores_.end(), row.begin(), row.end());
    labels_.push_back(label);
}

std::size_t bin_index(double confidence, std::size_t n_bins) {
    const double scaled = std::floor(confidence * static_cast<double>(n_bins));
    if (!(scaled >= 0.0)) {
        return 0;
    }
    return std::min(static_cast<std::size_t>(scaled), n_bins - 1);
}

double ece_from_bins(std::span<const ReliabilityBin> bins, std::size_t n) {
    double total = 0.0;
    for (const ReliabilityBin& b : bins) {
        total += static_cast<double>(b.count) * std::abs(b.accuracy - b.confidence);
    }
    return total / static_cast<double>(n);
}

BinningReport bin_reliability(const PredictionSet& preds, std::size_t n_bins) {
    require_nonempty(preds);
    require_probabilities(preds);
    require_bins(n_bins);

    BinningReport report;
    report.n = preds.size();
    report.bins.resize(n_bins);
    std::vector<double> correct(n_bins, 0.0);
    std::vector<double> confidence(n_bins, 0.0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto row = preds.row(i);
        const std::size_t top = argmax(row);
        const std::size_t j = bin_index(row[top], n_bins);
        report.bins[j].count += 1;
        confidence[j] += row[top];
        if (static_cast<int>(top) == preds.label(i)) {
            correct[j] += 1.0;
        }
    }
    for (std::size_t j = 0; j < n_bins; ++j) {
        ReliabilityBin& b = report.bins[j];
        b.lower = static_cast<double>(j) / static_cast<double>(n_bins);
        b.upper = static_cast<double>(j + 1) / static_cast<double>(n_bins);
        if (b.count > 0) {
            b.accuracy = correct[j] / static_cast<double>(b.count);
            b.confidence = confidence[j] / static_cast<double>(b.count);
        }
    }
    report.ece = ece_from_bins(report.bins, report.n);
    return report;
}

double ece(const PredictionSet& preds, std::size_t n_bins) {
    return bin_reliability(preds, n_bins).ece;
}

double cw_ece(const PredictionSet& preds, std::size_t n_bins) {
    require_nonempty(preds);
    require_probabilities(preds);
    require_bins(n_bins);

    const std::size_t k = preds.k();
    const double n = static_cast<double>(preds.size());
    double total = 0.0;
    std::vector<double> count(n_bins);
    std::vector<double> hits(n_bins);
    std::vector<double> confidence(n_bins);
    for (std::size_t l = 0; l < k; ++l) {
        std::fill(count.begin(), count.end(), 0.0);
        std::fill(hits.begin(), hits.end(), 0.0);
        std::fill(confidence.begin(), confidence.end(), 0.0);
        for (std::size_t i = 0; i < preds.size(); ++i) {
            const double c = preds.row(i)[l];
            const std::size_t j = bin_index(c, n_bins);
            count[j] += 1.0;
            confidence[j] += c;
            if (preds.label(i) == static_cast<int>(l)) {
                hits[j] += 1.0;
            }
        }
        for (std::size_t j = 0; j < n_bins; ++j) {
            if (count[j] > 0.0) {
                // |B|/n * |prop - conf| with prop = hits/|B| and conf = sum/|B|
                total += std::abs(hits[j] - confidence[j]) / n;
            }
        }
    }
    return total / static_cast<double>(k);
}

double nll(const PredictionSet& preds, Reduction reduction, LogMode mode) {
    require_nonempty(preds);
    require_probabilities(preds);
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        double q = preds.row(i)[static_cast<std::size_t>(preds.label(i))];
        if (mode == LogMode::Safe) {
            q = std::clamp(q, kLogClamp, 1.0 - kLogClamp);
        }
        if (q == 0.0) {
            return kInfinity;
        }
        total -= std::log(q);
    }
    return reduction == Reduction::Sum ? total : total / static_cast<double>(preds.size());
}

double kld(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw DimensionError("kld needs vectors of equal length");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) {
            continue;
        }
        if (q[i] == 0.0) {
            return kInfinity;
        }
        total += p[i] * std::log(p[i] / q[i]);
    }
    // Rounding can leave a tiny negative sum when p and q agree to ~1 ulp.
    return std::max(total, 0.0);
}

double error_rate(const PredictionSet& preds) {
    require_nonempty(preds);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (static_cast<int>(argmax(preds.row(i))) != preds.label(i)) {
            ++wrong;
        }
    }
    return static_cast<double>(wrong) / static_cast<double>(preds.size());
}

}  // namespace focal
