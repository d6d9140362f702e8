#include "focal/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace focal::io {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& token, std::size_t line) {
    if (token.empty()) {
        throw ParseError("empty numeric field", line);
    }
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || errno == ERANGE || !std::isfinite(v)) {
        throw ParseError("not a finite number: '" + token + "'", line);
    }
    return v;
}

int parse_label(const std::string& token, std::size_t k, std::size_t line) {
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(token.c_str(), &end, 10);
    if (token.empty() || end != token.c_str() + token.size() || errno == ERANGE) {
        throw ParseError("label is not an integer: '" + token + "'", line);
    }
    if (v < 1 || static_cast<std::size_t>(v) > k) {
        throw ParseError("label " + token + " outside [1, " + std::to_string(k) + "]", line);
    }
    return static_cast<int>(v - 1);
}

// Applies the probability-row rules in place: entries in [0, 1] and a sum
// within kRowTolerance of 1, or any positive sum when renormalizing.
void check_row(std::vector<double>& row, const LoadOptions& options, std::size_t line) {
    if (options.kind != ScoreKind::Probabilities) {
        return;
    }
    double sum = 0.0;
    for (double v : row) {
        if (v < 0.0 || (v > 1.0 && !options.renormalize)) {
            throw InvalidSimplex("probability entry outside [0, 1]", line);
        }
        sum += v;
    }
    if (options.renormalize) {
        if (!(sum > 0.0)) {
            throw InvalidSimplex("cannot renormalize a row that sums to 0", line);
        }
        for (double& v : row) {
            v /= sum;
        }
    } else if (std::abs(sum - 1.0) > kRowTolerance) {
        throw InvalidSimplex("row sums to " + format_double(sum) + ", not 1", line);
    }
}

PredictionSet parse_csv(std::istream& in, const LoadOptions& options) {
    std::string text;
    std::size_t line_no = 0;
    std::size_t k = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (!trim(text).empty()) {
            break;
        }
    }
    const std::vector<std::string> header = split(text, ',');
    if (header.empty() || header.front() != "label") {
        throw ParseError("CSV header must start with 'label'", line_no);
    }
    k = header.size() - 1;
    if (k < 2) {
        throw InconsistentK("CSV header declares fewer than 2 score columns", line_no);
    }

    PredictionSet set(k, options.kind);
    std::vector<double> row(k);
    while (std::getline(in, text)) {
        ++line_no;
        if (trim(text).empty()) {
            continue;
        }
        const std::vector<std::string> fields = split(text, ',');
        if (fields.size() != k + 1) {
            throw InconsistentK("expected " + std::to_string(k + 1) + " fields, got " +
                                    std::to_string(fields.size()),
                                line_no);
        }
        const int label = parse_label(fields[0], k, line_no);
        for (std::size_t j = 0; j < k; ++j) {
            row[j] = parse_double(fields[j + 1], line_no);
        }
        check_row(row, options, line_no);
        set.add(row, label);
    }
    return set;
}

PredictionSet parse_jsonl(std::istream& in, const LoadOptions& options) {
    std::string text;
    std::size_t line_no = 0;
    std::optional<PredictionSet> set;
    while (std::getline(in, text)) {
        ++line_no;
        if (trim(text).empty()) {
            continue;
        }
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        if (!obj.is_object() || !obj.contains("label") || !obj.contains("scores") ||
            !obj["label"].is_number_integer() || !obj["scores"].is_array()) {
            throw ParseError("expected {\"label\": int, \"scores\": [...]}", line_no);
        }
        std::vector<double> row;
        for (const auto& v : obj["scores"]) {
            if (!v.is_number()) {
                throw ParseError("scores must be numbers", line_no);
            }
            row.push_back(v.get<double>());
            if (!std::isfinite(row.back())) {
                throw ParseError("scores must be finite", line_no);
            }
        }
        if (!set) {
            if (row.size() < 2) {
                throw InconsistentK("need at least 2 scores per row", line_no);
            }
            set.emplace(row.size(), options.kind);
        } else if (row.size() != set->k()) {
            throw InconsistentK("expected " + std::to_string(set->k()) + " scores, got " +
                                    std::to_string(row.size()),
                                line_no);
        }
        const long long label = obj["label"].get<long long>();
        if (label < 1 || static_cast<std::size_t>(label) > set->k()) {
            throw ParseError("label " + std::to_string(label) + " outside [1, " +
                                 std::to_string(set->k()) + "]",
                             line_no);
        }
        check_row(row, options, line_no);
        set->add(row, static_cast<int>(label - 1));
    }
    if (!set) {
        throw ParseError("no rows in JSONL input", 0);
    }
    return std::move(*set);
}

std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

FileFormat format_for(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    return ext == ".jsonl" || ext == ".json" ? FileFormat::JSONL : FileFormat::CSV;
}

PredictionSet parse_predictions(std::istream& in, FileFormat format, const LoadOptions& options) {
    return format == FileFormat::CSV ? parse_csv(in, options) : parse_jsonl(in, options);
}

PredictionSet load_predictions(const std::filesystem::path& path, FileFormat format,
                               const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string(), 0);
    }
    return parse_predictions(in, format, options);
}

PredictionSet load_predictions(const std::filesystem::path& path, const LoadOptions& options) {
    return load_predictions(path, format_for(path), options);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_predictions(std::ostream& out, const PredictionSet& preds, FileFormat format) {
    if (format == FileFormat::CSV) {
        out << "label";
        for (std::size_t j = 1; j <= preds.k(); ++j) {
            out << ",s" << j;
        }
        out << '\n';
        for (std::size_t i = 0; i < preds.size(); ++i) {
            out << preds.label(i) + 1;
            for (double v : preds.row(i)) {
                out << ',' << format_double(v);
            }
            out << '\n';
        }
        return;
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
        out << "{\"label\": " << preds.label(i) + 1 << ", \"scores\": [";
        const auto row = preds.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            out << (j ? ", " : "") << format_double(row[j]);
        }
        out << "]}\n";
    }
}

void save_predictions(const std::filesystem::path& path, const PredictionSet& preds,
                      FileFormat format) {
    std::ostringstream out;
    write_predictions(out, preds, format);
    write_file_atomic(path, out.str());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write " + tmp.string(), 0);
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw DataError("write failed for " + tmp.string(), 0);
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string reliability_csv(const BinningReport& report) {
    std::ostringstream out;
    out << "bin,lower,upper,count,accuracy,confidence\n";
    for (std::size_t j = 0; j < report.bins.size(); ++j) {
        const ReliabilityBin& b = report.bins[j];
        out << j + 1 << ',' << format_double(b.lower) << ',' << format_double(b.upper) << ','
            << b.count << ',' << format_double(b.accuracy) << ',' << format_double(b.confidence)
            << '\n';
    }
    return out.str();
}

std::string reliability_svg(const BinningReport& report, std::string_view title) {
    constexpr double size = 320.0;
    constexpr double left = 50.0;
    constexpr double top = 40.0;
    const double bottom = top + size;
    const auto px = [&](double v) { return left + v * size; };
    const auto py = [&](double v) { return bottom - v * size; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(left + size + 20, 0)
        << "\" height=\"" << fixed(bottom + 50, 0) << "\">\n";
    svg << "<title>" << (title.empty() ? "Reliability diagram" : std::string(title))
        << " (ECE = " << fixed(report.ece, 4) << ")</title>\n";
    svg << "<text x=\"" << fixed(left) << "\" y=\"24\" font-family=\"sans-serif\" "
        << "font-size=\"14\">" << (title.empty() ? "Reliability diagram" : std::string(title))
        << " (ECE = " << fixed(report.ece, 4) << ")</text>\n";
    svg << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(size)
        << "\" height=\"" << fixed(size) << "\" fill=\"none\" stroke=\"black\"/>\n";

    const double width = size / static_cast<double>(std::max<std::size_t>(report.bins.size(), 1));
    for (std::size_t j = 0; j < report.bins.size(); ++j) {
        const ReliabilityBin& b = report.bins[j];
        const double height = b.count > 0 ? b.accuracy * size : 0.0;
        svg << "<rect class=\"bar\" x=\"" << fixed(left + j * width) << "\" y=\""
            << fixed(bottom - height) << "\" width=\"" << fixed(width) << "\" height=\""
            << fixed(height) << "\" data-accuracy=\"" << format_double(b.accuracy)
            << "\" data-confidence=\"" << format_double(b.confidence)
            << "\" fill=\"#4c72b0\" stroke=\"#1f3a60\"/>\n";
    }
    svg << "<line class=\"diagonal\" x1=\"" << fixed(px(0)) << "\" y1=\"" << fixed(py(0))
        << "\" x2=\"" << fixed(px(1)) << "\" y2=\"" << fixed(py(1))
        << "\" stroke=\"#c44e52\" stroke-dasharray=\"6,4\"/>\n";
    svg << "<text x=\"" << fixed(left + size / 2 - 30) << "\" y=\"" << fixed(bottom + 35)
        << "\" font-family=\"sans-serif\" font-size=\"12\">confidence</text>\n";
    svg << "<text x=\"12\" y=\"" << fixed(top + size / 2)
        << "\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 12 "
        << fixed(top + size / 2) << ")\">accuracy</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

void emit_reliability_svg(const BinningReport& report, const std::filesystem::path& path,
                          std::string_view title) {
    write_file_atomic(path, reliability_svg(report, title));
}

std::string phi_csv(Gamma gamma, std::size_t points) {
    std::ostringstream out;
    out << "v,phi\n";
    for (std::size_t i = 0; i < points; ++i) {
        const double v = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        out << format_double(v) << ',' << format_double(varphi(v, gamma)) << '\n';
    }
    return out.str();
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
    std::ostringstream out;
    out << "max_eta,max_qstar\n";
    for (const CurvePoint& p : curve) {
        out << format_double(p.max_eta) << ',' << format_double(p.max_qstar) << '\n';
    }
    return out.str();
}

std::string line_chart_svg(const std::vector<double>& x, const std::vector<Series>& series,
                           std::string_view title, double y_min, double y_max) {
    static const char* palette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3",
                                    "#937860", "#da8bc3", "#8c8c8c"};
    constexpr double w = 480.0;
    constexpr double h = 300.0;
    constexpr double left = 50.0;
    constexpr double top = 40.0;
    const double x_min = x.empty() ? 0.0 : x.front();
    const double x_max = x.empty() ? 1.0 : x.back();
    const auto px = [&](double v) { return left + (v - x_min) / (x_max - x_min) * w; };
    const auto py = [&](double v) { return top + h - (v - y_min) / (y_max - y_min) * h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(left + w + 140, 0)
        << "\" height=\"" << fixed(top + h + 40, 0) << "\">\n";
    svg << "<title>" << title << "</title>\n";
    svg << "<text x=\"" << fixed(left) << "\" y=\"24\" font-family=\"sans-serif\" "
        << "font-size=\"14\">" << title << "</text>\n";
    svg << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(w)
        << "\" height=\"" << fixed(h) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const std::string colour =
            series[s].colour.empty() ? palette[s % 8] : series[s].colour;
        svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << colour << "\""
            << (series[s].dashed ? " stroke-dasharray=\"5,4\"" : "") << " points=\"";
        for (std::size_t i = 0; i < x.size() && i < series[s].y.size(); ++i) {
            svg << (i ? " " : "") << fixed(px(x[i]), 2) << ',' << fixed(py(series[s].y[i]), 2);
        }
        svg << "\"/>\n";
        svg << "<text x=\"" << fixed(left + w + 10) << "\" y=\"" << fixed(top + 14 + 16.0 * s)
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << colour << "\">"
            << series[s].label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

Config Config::parse(std::istream& in) {
    Config config;
    std::string text;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (const auto hash = text.find('#'); hash != std::string::npos) {
            text.erase(hash);
        }
        const std::string line = trim(text);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("expected key = value", line_no);
        }
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) {
            throw ParseError("empty key", line_no);
        }
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        config.values_[section.empty() ? key : section + "." + key] = value;
    }
    return config;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open config " + path.string(), 0);
    }
    return parse(in);
}

std::optional<std::string> Config::get(const std::string& key) const {
    if (auto it = values_.find(key); it != values_.end()) {
        return it->second;
    }
    return std::nullopt;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    return v ? parse_double(*v, 0) : fallback;
}

long long Config::get_int(const std::string& key, long long fallback) const {
    const auto v = get(key);
    if (!v) {
        return fallback;
    }
    char* end = nullptr;
    const long long out = std::strtoll(v->c_str(), &end, 10);
    if (v->empty() || end != v->c_str() + v->size()) {
        throw ParseError("config value for '" + key + "' is not an integer", 0);
    }
    return out;
}

std::vector<double> Config::get_list(const std::string& key) const {
    const auto v = get(key);
    if (!v) {
        return {};
    }
    std::string body = *v;
    if (!body.empty() && body.front() == '[') {
        body.erase(0, 1);
    }
    if (!body.empty() && body.back() == ']') {
        body.pop_back();
    }
    std::vector<double> out;
    if (trim(body).empty()) {
        return out;
    }
    for (const std::string& token : split(body, ',')) {
        out.push_back(parse_double(token, 0));
    }
    return out;
}

}  // namespace focal::io
