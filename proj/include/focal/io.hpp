#pragma once

// Prediction files, reliability-diagram output and the small key=value config
// format used by the CLI.
//
// CSV:   header "label,s1,...,sK", then one row per sample.
// JSONL: one {"label": int, "scores": [...]} object per line.
// Labels are 1-based in files and 0-based once loaded.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "focal/metrics.hpp"
#include "focal/minimizer.hpp"

namespace focal::io {

enum class FileFormat { CSV, JSONL };

struct LoadOptions {
    ScoreKind kind = ScoreKind::Probabilities;
    bool renormalize = false;
};

// Picks JSONL for .jsonl/.json extensions, CSV otherwise.
FileFormat format_for(const std::filesystem::path& path);

PredictionSet parse_predictions(std::istream& in, FileFormat format, const LoadOptions& options);
PredictionSet load_predictions(const std::filesystem::path& path, FileFormat format,
                               const LoadOptions& options);
PredictionSet load_predictions(const std::filesystem::path& path, const LoadOptions& options);

void write_predictions(std::ostream& out, const PredictionSet& preds, FileFormat format);
void save_predictions(const std::filesystem::path& path, const PredictionSet& preds,
                      FileFormat format);

// Shortest round-trippable rendering (17 significant digits).
std::string format_double(double v);

// Writes to a sibling temp file and renames it over path.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string reliability_csv(const BinningReport& report);
std::string reliability_svg(const BinningReport& report, std::string_view title = "");
void emit_reliability_svg(const BinningReport& report, const std::filesystem::path& path,
                          std::string_view title = "");

std::string phi_csv(Gamma gamma, std::size_t points);
std::string curve_csv(const std::vector<CurvePoint>& curve);

struct Series {
    std::string label;
    std::vector<double> y;
    bool dashed = false;
    std::string colour;  // palette colour by position when empty
};

// Line chart of several series over a shared x grid.
std::string line_chart_svg(const std::vector<double>& x, const std::vector<Series>& series,
                           std::string_view title, double y_min = 0.0, double y_max = 1.0);

// "key = value" lines, '#' comments and "[section]" headers that prefix the
// following keys as "section.key".
class Config {
public:
    static Config parse(std::istream& in);
    static Config load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::vector<double> get_list(const std::string& key) const;
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace focal::io
