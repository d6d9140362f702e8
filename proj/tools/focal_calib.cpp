// focal-calib: command-line front end for the focal calibration library.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error, 3 data error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "focal/calibrate.hpp"
#include "focal/experiment.hpp"
#include "focal/io.hpp"
#include "focal/metrics.hpp"
#include "focal/minimizer.hpp"
#include "focal/thresholds.hpp"
#include "focal/verify.hpp"

namespace fs = std::filesystem;
using namespace focal;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::uint64_t seed = 0;
    bool seed_given = false;
    double tolerance = kThresholdTolerance;
    bool renormalize = false;
};

std::string fmt(double v) { return io::format_double(v); }

io::FileFormat parse_format(const std::string& name, const fs::path& fallback) {
    if (name.empty()) {
        return io::format_for(fallback);
    }
    if (name == "csv") {
        return io::FileFormat::CSV;
    }
    if (name == "jsonl") {
        return io::FileFormat::JSONL;
    }
    throw UsageError("unknown format '" + name + "' (expected csv or jsonl)");
}

fs::path sibling(const fs::path& input, const std::string& suffix) {
    fs::path out = input;
    out.replace_extension();
    out += suffix;
    return out;
}

// transform -------------------------------------------------------------------

struct TransformArgs {
    std::string input;
    std::string output;
    double psi = 0.0;
    std::optional<double> temperature;
    bool logits = false;
    std::string format;
};

int run_transform(const Globals& g, const TransformArgs& a) {
    const ScoreKind kind = a.logits ? ScoreKind::Logits : ScoreKind::Probabilities;
    PredictionSet preds = io::load_predictions(a.input, {kind, g.renormalize});
    if (a.logits || a.temperature) {
        const PredictionSet logits = a.logits ? preds : to_logits(preds);
        preds = apply_temperature(logits, a.temperature.value_or(1.0));
    }
    preds = apply_psi_dataset(preds, Gamma(a.psi));
    io::save_predictions(a.output, preds, parse_format(a.format, a.output));
    std::cout << "wrote " << preds.size() << " rows to " << a.output << "\n";
    return kExitOk;
}

// metrics ---------------------------------------------------------------------

struct MetricsArgs {
    std::string input;
    std::size_t bins = 10;
    std::optional<double> psi;
    bool logits = false;
    std::string csv;
    std::string svg;
};

int run_metrics(const Globals& g, const MetricsArgs& a) {
    const ScoreKind kind = a.logits ? ScoreKind::Logits : ScoreKind::Probabilities;
    PredictionSet preds = io::load_predictions(a.input, {kind, g.renormalize});
    if (a.logits) {
        preds = apply_temperature(preds, 1.0);
    }
    if (a.psi) {
        preds = apply_psi_dataset(preds, Gamma(*a.psi));
    }
    const BinningReport report = bin_reliability(preds, a.bins);
    std::cout << "n: " << preds.size() << "\n"
              << "k: " << preds.k() << "\n"
              << "ece: " << fmt(report.ece) << "\n"
              << "cw_ece: " << fmt(cw_ece(preds, a.bins)) << "\n"
              << "nll: " << fmt(nll(preds, Reduction::Sum, LogMode::Safe)) << "\n"
              << "nll_mean: " << fmt(nll(preds, Reduction::Mean, LogMode::Safe)) << "\n"
              << "error_rate: " << fmt(error_rate(preds)) << "\n";

    const fs::path csv = a.csv.empty() ? sibling(a.input, ".reliability.csv") : fs::path(a.csv);
    const fs::path svg = a.svg.empty() ? sibling(a.input, ".reliability.svg") : fs::path(a.svg);
    std::string title = fs::path(a.input).filename().string();
    if (a.psi) {
        title += " (psi gamma=" + fmt(*a.psi) + ")";
    }
    io::write_file_atomic(csv, io::reliability_csv(report));
    io::emit_reliability_svg(report, svg, title);
    std::cout << "reliability: " << csv.string() << ", " << svg.string() << "\n";
    return kExitOk;
}

// thresholds ------------------------------------------------------------------

struct ThresholdArgs {
    double gamma = 0.0;
    std::size_t points = 1001;
    std::string output;
};

int run_thresholds(const Globals& g, const ThresholdArgs& a) {
    if (!(a.gamma > 0.0)) {
        throw UsageError("thresholds need gamma > 0 (phi is constant at gamma 0)");
    }
    const ThresholdPair t = thresholds(Gamma(a.gamma), g.tolerance);
    const std::string csv = io::phi_csv(Gamma(a.gamma), a.points);
    std::ostringstream head;
    head << "# gamma=" << fmt(a.gamma) << "\n"
         << "# tau_oc=" << fmt(t.tau_oc) << "\n"
         << "# tau_uc=" << fmt(t.tau_uc) << "\n";
    if (a.output.empty()) {
        std::cout << head.str() << csv;
    } else {
        io::write_file_atomic(a.output, csv);
        std::cout << head.str() << "# phi curve: " << a.output << "\n";
    }
    return kExitOk;
}

// curve -----------------------------------------------------------------------

struct CurveArgs {
    std::size_t k = 2;
    double gamma = 0.0;
    std::size_t grid = 99;
    std::string output;
};

int run_curve(const CurveArgs& a) {
    const std::string csv = io::curve_csv(confidence_curve(a.k, Gamma(a.gamma), a.grid));
    if (a.output.empty()) {
        std::cout << csv;
    } else {
        io::write_file_atomic(a.output, csv);
        std::cout << "wrote " << a.grid << " points to " << a.output << "\n";
    }
    return kExitOk;
}

// ts-fit ----------------------------------------------------------------------

struct TsArgs {
    std::string input;
    std::string objective = "nll";
    double gamma = 0.0;
    bool probabilities = false;
};

int run_ts_fit(const Globals& g, const TsArgs& a) {
    const TemperatureObjective objective =
        a.objective == "focal" ? TemperatureObjective::Focal : TemperatureObjective::NLL;
    PredictionSet preds = io::load_predictions(
        a.input, {a.probabilities ? ScoreKind::Probabilities : ScoreKind::Logits, g.renormalize});
    if (a.probabilities) {
        preds = to_logits(preds);
    }
    const TemperatureFit fit = fit_temperature(preds, objective, Gamma(a.gamma));
    std::cout << "objective: " << a.objective;
    if (objective == TemperatureObjective::Focal) {
        std::cout << " (gamma=" << fmt(a.gamma) << ")";
    }
    std::cout << "\n"
              << "temperature: " << fmt(fit.temperature) << "\n"
              << "objective_at_fit: " << fmt(fit.achieved) << "\n"
              << "objective_at_1: "
              << fmt(temperature_objective(preds, 1.0, objective, Gamma(a.gamma))) << "\n";
    return kExitOk;
}

// synth -----------------------------------------------------------------------

struct SynthArgs {
    std::string config;
    std::string out;
    bool plot = false;
    std::optional<std::size_t> train_n;
    std::optional<std::size_t> test_n;
    std::optional<int> epochs;
};

ExperimentConfig experiment_config(const Globals& g, const SynthArgs& a) {
    ExperimentConfig c;
    io::Config file;
    if (!a.config.empty()) {
        file = io::Config::load(a.config);
    }
    const std::vector<double> priors = file.get_list("mixture.priors");
    const std::vector<double> means = file.get_list("mixture.means");
    std::vector<double> stddevs = file.get_list("mixture.stddevs");
    if (!priors.empty() || !means.empty() || !stddevs.empty()) {
        if (stddevs.empty()) {
            stddevs.assign(means.size(), 1.0);
        }
        if (priors.size() != means.size() || means.size() != stddevs.size()) {
            throw ParseError("mixture.priors, mixture.means and mixture.stddevs differ in length", 0);
        }
        std::vector<MixtureComponent> comps;
        for (std::size_t i = 0; i < priors.size(); ++i) {
            comps.push_back({priors[i], means[i], stddevs[i]});
        }
        c.dist = SyntheticDistribution(std::move(comps));
    }
    const auto size = [&](const std::string& key, std::size_t fallback) {
        const long long v = file.get_int(key, static_cast<long long>(fallback));
        if (v <= 0) {
            throw ParseError(key + " must be positive", 0);
        }
        return static_cast<std::size_t>(v);
    };
    c.train_n = size("data.train_n", c.train_n);
    c.val_n = size("data.val_n", c.val_n);
    c.test_n = size("data.test_n", c.test_n);
    c.train.epochs = static_cast<int>(file.get_int("train.epochs", c.train.epochs));
    c.train.batch_size = size("train.batch_size", c.train.batch_size);
    c.train.hidden = size("train.hidden", c.train.hidden);
    c.train.learning_rate = file.get_double("train.learning_rate", c.train.learning_rate);
    c.train.momentum = file.get_double("train.momentum", c.train.momentum);
    c.train.weight_decay = file.get_double("train.weight_decay", c.train.weight_decay);
    if (file.has("experiment.gammas")) {
        c.focal_gammas = file.get_list("experiment.gammas");
    }
    if (file.has("grid.lo") || file.has("grid.hi") || file.has("grid.points")) {
        c.grid = linear_grid(file.get_double("grid.lo", -5.0), file.get_double("grid.hi", 5.0),
                             size("grid.points", 201));
    }
    c.data_seed = static_cast<std::uint64_t>(file.get_int("seed.data", 1));
    c.model_seed = static_cast<std::uint64_t>(file.get_int("seed.model", 7));
    c.val_seed = static_cast<std::uint64_t>(file.get_int("seed.val", 3));
    c.test_seed = static_cast<std::uint64_t>(file.get_int("seed.test", 99));
    if (g.seed_given) {
        c.data_seed = g.seed;
        c.model_seed = g.seed + 1;
        c.val_seed = g.seed + 2;
        c.test_seed = g.seed + 3;
    }
    if (a.train_n) c.train_n = *a.train_n;
    if (a.test_n) c.test_n = *a.test_n;
    if (a.epochs) c.train.epochs = *a.epochs;
    c.validate();
    return c;
}

std::string scores_csv(const ExperimentConfig& c, const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    out << "x";
    for (std::size_t j = 1; j <= c.dist.k(); ++j) {
        out << ",s" << j;
    }
    out << ",max_score,max_eta\n";
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
        out << fmt(c.grid[i]);
        for (double v : rows[i]) {
            out << "," << fmt(v);
        }
        out << "," << fmt(*std::max_element(rows[i].begin(), rows[i].end())) << ","
            << fmt(posterior(c.dist, c.grid[i]).max()) << "\n";
    }
    return out.str();
}

int run_synth(const Globals& g, const SynthArgs& a) {
    const ExperimentConfig c = experiment_config(g, a);
    const fs::path out(a.out);
    fs::create_directories(out);
    const ExperimentResult r = run_experiment(c);
    const std::size_t k = c.dist.k();

    std::ostringstream dataset;
    dataset << "x,label\n";
    for (const LabeledPoint& p : r.train) {
        dataset << fmt(p.x) << "," << p.y + 1 << "\n";
    }
    io::write_file_atomic(out / "dataset.csv", dataset.str());

    std::ostringstream density;
    density << "x,p_x";
    for (std::size_t y = 1; y <= k; ++y) {
        density << ",p_x_y" << y;
    }
    density << "\n";
    for (double x : c.grid) {
        density << fmt(x) << "," << fmt(c.dist.density(x));
        for (std::size_t y = 0; y < k; ++y) {
            density << "," << fmt(c.dist.joint_density(x, y));
        }
        density << "\n";
    }
    io::write_file_atomic(out / "density.csv", density.str());

    std::ostringstream losses;
    losses << "epoch";
    for (const TrainedModel& m : r.models) {
        losses << "," << m.name;
        std::ostringstream model;
        m.model.save(model);
        io::write_file_atomic(out / ("model_" + m.name + ".txt"), model.str());
    }
    losses << "\n";
    for (std::size_t e = 0; e < r.models.front().epoch_loss.size(); ++e) {
        losses << e + 1;
        for (const TrainedModel& m : r.models) {
            losses << "," << fmt(m.epoch_loss[e]);
        }
        losses << "\n";
    }
    io::write_file_atomic(out / "training_loss.csv", losses.str());

    std::ostringstream summary;
    summary << "panel,model,temperature,psi_gamma,err,kld,ece\n";
    std::printf("%-10s %8s %8s %8s %8s\n", "panel", "T", "ERR", "KLD", "ECE");
    const auto eta_rows = r.grid_scores(c, "true");
    for (const ExperimentPanel& p : r.panels) {
        summary << p.name << "," << p.model << "," << fmt(p.temperature) << ","
                << (p.psi ? fmt(p.psi->value()) : "") << "," << fmt(p.report.err) << ","
                << fmt(p.report.kld) << "," << fmt(p.report.ece) << "\n";
        std::printf("%-10s %8.4f %8.4f %8.4f %8.4f\n", p.name.c_str(), p.temperature,
                    p.report.err, p.report.kld, p.report.ece);
        const auto rows = r.grid_scores(c, p.name);
        io::write_file_atomic(out / ("panel_" + p.name + ".csv"), scores_csv(c, rows));
        if (a.plot) {
            std::vector<io::Series> series;
            for (std::size_t j = 0; j < k; ++j) {
                io::Series s{"class " + std::to_string(j + 1), {}, false, ""};
                io::Series e{"eta " + std::to_string(j + 1), {}, true, ""};
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    s.y.push_back(rows[i][j]);
                    e.y.push_back(eta_rows[i][j]);
                }
                series.push_back(std::move(s));
                if (p.name != "true") {
                    series.push_back(std::move(e));
                }
            }
            // Pair each class with its dashed posterior in the same colour.
            static const char* palette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                                            "#8172b3", "#937860", "#da8bc3", "#8c8c8c"};
            const std::size_t per_class = p.name == "true" ? 1 : 2;
            for (std::size_t i = 0; i < series.size(); ++i) {
                series[i].colour = palette[(i / per_class) % 8];
            }
            char title[160];
            std::snprintf(title, sizeof title, "%s  ERR %.4f  KLD %.4f  ECE %.4f", p.name.c_str(),
                          p.report.err, p.report.kld, p.report.ece);
            io::write_file_atomic(out / ("plot_" + p.name + ".svg"),
                                  io::line_chart_svg(c.grid, series, title));
        }
    }
    io::write_file_atomic(out / "panels.csv", summary.str());
    std::cout << "outputs in " << out.string() << "\n";
    return kExitOk;
}

// verify ----------------------------------------------------------------------

struct VerifyArgs {
    std::vector<double> gammas{0.5, 1.0, 2.0, 3.0, 5.0};
    std::vector<std::size_t> ks{2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::size_t n = 1000;
};

int run_verify_cmd(const Globals& g, const VerifyArgs& a) {
    VerifyOptions o;
    o.gammas = a.gammas;
    o.ks = a.ks;
    o.n_random = a.n;
    o.seed = g.seed;
    const VerifyReport report = run_verify(o);
    report.print(std::cout);
    return report.all_passed() ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Focal-loss calibration toolkit"};
    app.name("focal-calib");
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Random seed")->each([&](const std::string&) {
        g.seed_given = true;
    });
    app.add_option("--tolerance", g.tolerance, "Threshold solver tolerance")
        ->check(CLI::PositiveNumber);
    app.add_flag("--renormalize", g.renormalize, "Renormalize probability rows on load");

    TransformArgs ta;
    auto* transform = app.add_subcommand("transform", "Apply temperature and/or Psi to a file");
    transform->add_option("--input", ta.input)->required()->check(CLI::ExistingFile);
    transform->add_option("--output", ta.output)->required();
    transform->add_option("--psi", ta.psi, "Psi gamma (0 = identity)")
        ->check(CLI::NonNegativeNumber);
    transform->add_option("--temperature", ta.temperature)->check(CLI::PositiveNumber);
    transform->add_flag("--logits", ta.logits, "Input rows are logits");
    transform->add_option("--format", ta.format, "csv or jsonl (default: by extension)")
        ->check(CLI::IsMember({"csv", "jsonl"}));

    MetricsArgs ma;
    auto* metrics = app.add_subcommand("metrics", "ECE, CW-ECE, NLL and error rate");
    metrics->add_option("--input", ma.input)->required()->check(CLI::ExistingFile);
    metrics->add_option("--bins", ma.bins)->check(CLI::PositiveNumber);
    metrics->add_option("--psi", ma.psi, "Apply Psi with this gamma first")
        ->check(CLI::NonNegativeNumber);
    metrics->add_flag("--logits", ma.logits, "Input rows are logits (softmax first)");
    metrics->add_option("--csv", ma.csv, "Reliability CSV path");
    metrics->add_option("--svg", ma.svg, "Reliability SVG path");

    ThresholdArgs th;
    auto* thresh = app.add_subcommand("thresholds", "tau_oc, tau_uc and the phi curve");
    thresh->add_option("--gamma", th.gamma)->required()->check(CLI::NonNegativeNumber);
    thresh->add_option("--points", th.points)->check(CLI::Range(2, 10000000));
    thresh->add_option("--output", th.output, "Write the phi CSV here instead of stdout");

    CurveArgs ca;
    auto* curve = app.add_subcommand("curve", "max eta against max q* along a uniform tail");
    curve->add_option("--k", ca.k)->required()->check(CLI::Range(2, 100000));
    curve->add_option("--gamma", ca.gamma)->required()->check(CLI::NonNegativeNumber);
    curve->add_option("--grid", ca.grid)->required()->check(CLI::Range(1, 10000000));
    curve->add_option("--output", ca.output);

    TsArgs ts;
    auto* tsfit = app.add_subcommand("ts-fit", "Fit a temperature on a logit file");
    tsfit->add_option("--input", ts.input)->required()->check(CLI::ExistingFile);
    tsfit->add_option("--objective", ts.objective)->check(CLI::IsMember({"nll", "focal"}));
    tsfit->add_option("--gamma", ts.gamma)->check(CLI::NonNegativeNumber);
    tsfit->add_flag("--probabilities", ts.probabilities, "Input rows are probabilities");

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "Synthetic mixture experiment");
    synth->add_option("--config", sa.config)->check(CLI::ExistingFile);
    synth->add_option("--out", sa.out)->required();
    synth->add_flag("--plot", sa.plot, "Also write SVG score-vs-x plots");
    synth->add_option("--train-n", sa.train_n)->check(CLI::PositiveNumber);
    synth->add_option("--test-n", sa.test_n)->check(CLI::PositiveNumber);
    synth->add_option("--epochs", sa.epochs)->check(CLI::PositiveNumber);

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Numerical checks of the structural properties");
    verify->add_option("--gammas", va.gammas)->delimiter(',')->check(CLI::NonNegativeNumber);
    verify->add_option("--ks", va.ks)->delimiter(',')->check(CLI::Range(2, 100000));
    verify->add_option("--n", va.n, "Random instances per sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*transform) return run_transform(g, ta);
        if (*metrics) return run_metrics(g, ma);
        if (*thresh) return run_thresholds(g, th);
        if (*curve) return run_curve(ca);
        if (*tsfit) return run_ts_fit(g, ts);
        if (*synth) return run_synth(g, sa);
        if (*verify) return run_verify_cmd(g, va);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
