#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "focal/errors.hpp"
#include "focal/io.hpp"
#include "focal/sampling.hpp"

using namespace focal;
namespace fs = std::filesystem;

namespace {

PredictionSet parse(const std::string& text, io::FileFormat f, io::LoadOptions o = {}) {
    std::istringstream in(text);
    return io::parse_predictions(in, f, o);
}

fs::path temp_dir() {
    const fs::path d = fs::temp_directory_path() / "focal_calib_io_test";
    fs::create_directories(d);
    return d;
}

std::size_t count(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t at = s.find(needle); at != std::string::npos; at = s.find(needle, at + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("CSV parsing") {
    const PredictionSet p = parse("label,s1,s2\n1,0.25,0.75\n2,0.5,0.5\n", io::FileFormat::CSV);
    CHECK(p.size() == 2);
    CHECK(p.k() == 2);
    CHECK(p.label(0) == 0);
    CHECK(p.label(1) == 1);
    CHECK(p.row(0)[1] == 0.75);
}

TEST_CASE("CSV errors carry line numbers") {
    try {
        parse("label,s1,s2\n1,0.5,0.5\n1,0.5,0.3\n", io::FileFormat::CSV);
        FAIL("expected InvalidSimplex");
    } catch (const InvalidSimplex& e) {
        CHECK(e.line() == 3);
    }
    try {
        parse("label,s1,s2\n0,0.5,0.5\n", io::FileFormat::CSV);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse("label,s1,s2\n1,0.5,0.5,0.0\n", io::FileFormat::CSV), InconsistentK);
    CHECK_THROWS_AS(parse("label,s1,s2\n1,abc,0.5\n", io::FileFormat::CSV), ParseError);
    CHECK_THROWS_AS(parse("label,s1,s2\n1.5,0.5,0.5\n", io::FileFormat::CSV), ParseError);
    CHECK_THROWS_AS(parse("y,s1,s2\n1,0.5,0.5\n", io::FileFormat::CSV), ParseError);
    CHECK_THROWS_AS(parse("label,s1\n1,1.0\n", io::FileFormat::CSV), InconsistentK);
}

TEST_CASE("renormalize only when asked") {
    const std::string text = "label,s1,s2\n1,0.4,0.4\n";
    CHECK_THROWS_AS(parse(text, io::FileFormat::CSV), InvalidSimplex);
    const PredictionSet p = parse(text, io::FileFormat::CSV, {ScoreKind::Probabilities, true});
    CHECK(p.row(0)[0] == 0.5);
    CHECK_THROWS_AS(parse("label,s1,s2\n1,0,0\n", io::FileFormat::CSV,
                          {ScoreKind::Probabilities, true}),
                    InvalidSimplex);
}

TEST_CASE("logit rows skip the simplex check") {
    const PredictionSet p = parse("label,s1,s2\n2,3.5,-1\n", io::FileFormat::CSV, {ScoreKind::Logits, false});
    CHECK(p.kind() == ScoreKind::Logits);
    CHECK(p.row(0)[0] == 3.5);
}

TEST_CASE("JSONL parsing") {
    const PredictionSet p = parse("{\"label\": 3, \"scores\": [0.1, 0.2, 0.7]}\n\n"
                                  "{\"label\": 1, \"scores\": [0.6, 0.2, 0.2]}\n",
                                  io::FileFormat::JSONL);
    CHECK(p.size() == 2);
    CHECK(p.label(0) == 2);
    CHECK_THROWS_AS(parse("{\"label\": 1, \"scores\": [0.5, 0.5]}\n{\"label\": 1, \"scores\": [1.0, 0, 0]}\n",
                          io::FileFormat::JSONL),
                    InconsistentK);
    CHECK_THROWS_AS(parse("{\"label\": 1, \"scores\": [0.5, 0.5]\n", io::FileFormat::JSONL), ParseError);
    CHECK_THROWS_AS(parse("{\"label\": 1}\n", io::FileFormat::JSONL), ParseError);
    CHECK_THROWS_AS(parse("", io::FileFormat::JSONL), ParseError);
}

TEST_CASE("format_for") {
    CHECK(io::format_for("a.jsonl") == io::FileFormat::JSONL);
    CHECK(io::format_for("a.json") == io::FileFormat::JSONL);
    CHECK(io::format_for("a.csv") == io::FileFormat::CSV);
    CHECK(io::format_for("a") == io::FileFormat::CSV);
}

TEST_CASE("load, save, load is lossless") {
    sampling::Rng rng(77);
    PredictionSet set(5, ScoreKind::Probabilities);
    for (int i = 0; i < 100; ++i) set.add(sampling::dirichlet(5, rng), i % 5);
    const fs::path dir = temp_dir();
    for (const char* name : {"rt.csv", "rt.jsonl"}) {
        const fs::path path = dir / name;
        io::save_predictions(path, set, io::format_for(path));
        const PredictionSet back = io::load_predictions(path, io::LoadOptions{});
        CHECK(back == set);
        io::save_predictions(path, back, io::format_for(path));
        CHECK(io::load_predictions(path, io::LoadOptions{}) == set);
    }
    CHECK_THROWS_AS(io::load_predictions(dir / "missing.csv", io::LoadOptions{}), DataError);
}

TEST_CASE("atomic write leaves no temp file") {
    const fs::path path = temp_dir() / "atomic.txt";
    io::write_file_atomic(path, "first");
    io::write_file_atomic(path, "second");
    std::ifstream in(path);
    std::string s;
    std::getline(in, s);
    CHECK(s == "second");
    for (const auto& e : fs::directory_iterator(temp_dir())) {
        CHECK(e.path().extension() != ".tmp");
    }
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5}) {
        CHECK(std::stod(io::format_double(v)) == v);
    }
}

TEST_CASE("reliability SVG structure") {
    BinningReport r;
    r.n = 10;
    for (int j = 0; j < 10; ++j) {
        const double mid = (j + 0.5) / 10.0;
        r.bins.push_back({j / 10.0, (j + 1) / 10.0, j == 3 ? 0u : 1u, j == 3 ? 0.0 : mid, j == 3 ? 0.0 : mid});
    }
    r.ece = 0.0;
    const std::string svg = io::reliability_svg(r, "demo");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(count(svg, "class=\"bar\"") == 10);
    CHECK(count(svg, "class=\"diagonal\"") == 1);
    CHECK(svg.find("ECE") != std::string::npos);
    CHECK(svg.find("nan") == std::string::npos);
    CHECK(svg.find("NaN") == std::string::npos);

    const std::string csv = io::reliability_csv(r);
    CHECK(count(csv, "\n") == 11);
}

TEST_CASE("calibrated bars meet the diagonal") {
    BinningReport r;
    r.n = 4;
    for (int j = 0; j < 4; ++j) {
        const double mid = (j + 0.5) / 4.0;
        r.bins.push_back({j / 4.0, (j + 1) / 4.0, 1u, mid, mid});
    }
    const std::string svg = io::reliability_svg(r);
    std::smatch m;
    const std::regex diag("class=\"diagonal\" x1=\"([^\"]+)\" y1=\"([^\"]+)\" x2=\"([^\"]+)\" y2=\"([^\"]+)\"");
    REQUIRE(std::regex_search(svg, m, diag));
    const double y1 = std::stod(m[2]), y2 = std::stod(m[4]);
    // Each bar's top edge sits on the diagonal at the bin's mean confidence.
    const std::regex bar("class=\"bar\" x=\"[^\"]+\" y=\"([^\"]+)\"[^>]*data-confidence=\"([^\"]+)\"");
    std::size_t seen = 0;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), bar); it != std::sregex_iterator(); ++it) {
        const double conf = std::stod((*it)[2]);
        CHECK(std::stod((*it)[1]) == doctest::Approx(y1 + conf * (y2 - y1)).epsilon(1e-3));
        ++seen;
    }
    CHECK(seen == 4);
}

TEST_CASE("phi and curve CSV") {
    const std::string phi = io::phi_csv(Gamma(2), 3);
    CHECK(phi.rfind("v,phi\n", 0) == 0);
    CHECK(count(phi, "\n") == 4);
    const std::string c = io::curve_csv({{0.6, 0.55}, {0.8, 0.7}});
    CHECK(c.rfind("max_eta,max_qstar\n", 0) == 0);
    CHECK(count(c, "\n") == 3);
}

TEST_CASE("config parsing") {
    std::istringstream in("# comment\ntop = 3\n[train]\nepochs = 12  # trailing\nlr = 0.5\n"
                          "[mixture]\npriors = [0.5, 0.5]\nname = \"two\"\n");
    const io::Config c = io::Config::parse(in);
    CHECK(c.get_int("top", 0) == 3);
    CHECK(c.get_int("train.epochs", 0) == 12);
    CHECK(c.get_double("train.lr", 0) == 0.5);
    CHECK(c.get_list("mixture.priors") == std::vector<double>{0.5, 0.5});
    CHECK(c.get("mixture.name") == std::optional<std::string>("two"));
    CHECK(c.get_double("missing", 7.0) == 7.0);
    CHECK_THROWS_AS(c.get_int("train.lr", 0), ParseError);
    std::istringstream bad("[x]\nno equals sign\n");
    CHECK_THROWS_AS(io::Config::parse(bad), ParseError);
}
