#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "harmonize/cli.hpp"
#include "harmonize/report.hpp"

using namespace harmonize;

namespace {

struct Output {
    int code;
    std::string out;
    std::string err;
};

Output run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

int parse_column(const std::string& text) {
    try {
        parse_grid(text);
    } catch (const ParseError& e) {
        return e.column;
    }
    return -1;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("number grids") {
        CHECK(parse_grid("2.5") == std::vector<double>{2.5});
        CHECK(parse_grid("1,2,3") == std::vector<double>{1, 2, 3});
        const std::vector<double> g = parse_grid("1e-3:1e3:7");
        REQUIRE(g.size() == 7);
        CHECK(g.front() == doctest::Approx(1e-3));
        CHECK(g[3] == doctest::Approx(1.0));
        CHECK(g.back() == doctest::Approx(1e3));
        CHECK(parse_column("1,x,3") == 3);
        CHECK(parse_column("abc") == 1);
        CHECK(parse_column("0:10:5") > 0);
        CHECK(parse_column("1:10") > 0);
        CHECK(parse_column("1,,2") > 0);
    }

    TEST_CASE("points") {
        const std::vector<FieldPoint> p = parse_points("1:0.5;2:-1");
        REQUIRE(p.size() == 2);
        CHECK(p[0].t == 1.0);
        CHECK(p[0].x == std::vector<double>{0.5});
        CHECK(p[1].x == std::vector<double>{-1.0});
        CHECK(parse_points("3").front().x.empty());
        CHECK(parse_points("").empty());
        CHECK_THROWS_AS(parse_points("1:a"), ParseError);
        CHECK(point_label(p[1]) == "2:-1");
    }

    TEST_CASE("check examples") {
        const Output yes = run_cli({"check", "--equation", "heat", "--beta", "2", "--dim", "1", "--nu", "riesz:0",
                                    "--mu", "lebesgue"});
        CHECK(yes.code == 0);
        const nlohmann::json j = nlohmann::json::parse(yes.out);
        CHECK(j["schema"] == "harmonize/1");
        CHECK(j["decision"] == "Yes");
        CHECK(j["exponent"].get<double>() == doctest::Approx(1.0));

        const std::vector<std::string> no_args{"check", "--equation", "wave", "--beta", "2", "--dim", "3", "--nu",
                                               "riesz:-0.6", "--mu", "lebesgue"};
        const Output no = run_cli(no_args);
        CHECK(no.code == 0);
        CHECK(nlohmann::json::parse(no.out)["decision"] == "No");
        std::vector<std::string> strict = no_args;
        strict.push_back("--strict");
        CHECK(run_cli(strict).code == 1);
    }

    TEST_CASE("nt example") {
        const Output o = run_cli({"nt", "--equation", "heat", "--nu", "riesz:0", "--t", "1", "--psi", "1"});
        CHECK(o.code == 0);
        const auto rows = csv_rows(o.out);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0] == std::vector<std::string>{"t", "psi", "n_t", "abs_error"});
        CHECK(rows[1][1] == "1");
        const double v = std::stod(rows[1][2]);
        CHECK(v == doctest::Approx(M_PI * (1.0 - std::exp(-2.0))).epsilon(1e-9));
        CHECK(v == doctest::Approx(2.715679).epsilon(1e-3));
    }

    TEST_CASE("I_t through the nt command") {
        const Output o = run_cli({"nt", "--nu", "riesz:0", "--mu", "lebesgue", "--t", "1", "--format", "json"});
        CHECK(o.code == 0);
        const nlohmann::json j = nlohmann::json::parse(o.out);
        CHECK(j["rows"][0]["i_t"].get<double>() == doctest::Approx(2.0 * M_PI * std::sqrt(2.0 * M_PI)).epsilon(1e-6));
        const Output div = run_cli({"nt", "--equation", "wave", "--dim", "3", "--mu", "lebesgue"});
        CHECK(div.code == 2);
        CHECK(div.err.find("Divergent") != std::string::npos);
    }

    TEST_CASE("errors exit with 2 and name the stage") {
        const Output bad_nu = run_cli({"check", "--nu", "riesz:abc"});
        CHECK(bad_nu.code == 2);
        CHECK(bad_nu.err.find("column 7") != std::string::npos);
        CHECK(run_cli({"frobnicate"}).code == 2);
        CHECK(run_cli({}).code == 2);
        CHECK(run_cli({"check", "--equation", "plasma"}).code == 2);
        CHECK(run_cli({"simulate", "--n", "511"}).code == 2);
        const Output fbf = run_cli({"simulate", "--noise", "fbf", "--dim", "2", "--n", "16", "--replicates", "2"});
        CHECK(fbf.code == 2);
        CHECK(fbf.err.rfind("simulate:", 0) == 0);
    }

    TEST_CASE("help exits 0") {
        const Output h = run_cli({"--help"});
        CHECK(h.code == 0);
        CHECK(h.out.find("--nu") != std::string::npos);
    }

    TEST_CASE("bounds CSV ends in an all-true column") {
        const Output o = run_cli({"bounds", "--t", "0.5,1", "--psi", "1e-3:1e3:7", "--format", "csv"});
        CHECK(o.code == 0);
        const auto rows = csv_rows(o.out);
        REQUIRE(rows.size() == 15);
        CHECK(rows[0].back() == "pass");
        for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].back() == "true");
    }

    TEST_CASE("empty tables print only the header") {
        BoundReport b;
        const std::string text = bounds_csv(b).str();
        CHECK(text == "t,psi,n_t,reference,lower,upper,pass\n");
        MomentReport m;
        m.table.points = 0;
        CHECK(csv_rows(moments_csv(m).str()).size() == 1);
    }

    TEST_CASE("JSON round trips") {
        ExistenceReport r = decide_existence(OperatorSpec::heat(2.0, 1), SpectralDensity1D::riesz(0.3),
                                             SpatialMeasure::radial_power(0.5, 1));
        r.note = "quote \" and backslash \\";
        const ExistenceReport back = existence_from_json(existence_json(r));
        CHECK(back.decision == r.decision);
        CHECK(back.reduced.exponent == r.reduced.exponent);
        CHECK(back.reduced.source == r.reduced.source);
        CHECK(back.reduced.analytic == r.reduced.analytic);
        CHECK(back.oracle.verdict == r.oracle.verdict);
        CHECK(back.oracle.growth_exponent_estimate == r.oracle.growth_exponent_estimate);
        CHECK(back.oracle.outer_exponent == r.oracle.outer_exponent);
        CHECK(back.oracle.inner_exponent == r.oracle.inner_exponent);
        CHECK(back.oracle_run == r.oracle_run);
        CHECK(back.agreement == r.agreement);
        CHECK(back.note == r.note);
        CHECK(existence_json(back) == existence_json(r));

        const BoundReport b = verify_bounds(OperatorSpec::heat(2.0, 1), SpectralDensity1D::riesz(0.0), {1.0, 2.0},
                                            {0.1, 1.0, 10.0});
        const BoundReport bb = bounds_from_json(bounds_json(r, b));
        REQUIRE(bb.rows.size() == b.rows.size());
        for (std::size_t i = 0; i < b.rows.size(); ++i) {
            CHECK(bb.rows[i].t == b.rows[i].t);
            CHECK(bb.rows[i].psi == b.rows[i].psi);
            CHECK(bb.rows[i].n_t == b.rows[i].n_t);
            CHECK(bb.rows[i].lower == b.rows[i].lower);
            CHECK(bb.rows[i].upper == b.rows[i].upper);
            CHECK(bb.rows[i].pass == b.rows[i].pass);
        }
        REQUIRE(bb.constants.size() == b.constants.size());
        CHECK(bb.constants[0].second == b.constants[0].second);
        CHECK(bounds_json(r, bb) == bounds_json(r, b));
    }

    TEST_CASE("number formatting") {
        CHECK(format_double(0.1) == "0.10000000000000001");
        CHECK(format_double(2.0) == "2");
        JsonWriter n;
        n.begin_array().value(NAN).value(INFINITY).end_array();
        CHECK(n.str() == "[\n  null,\n  null\n]\n");
        MomentReport m;
        m.points = {{1.0, {}}};
        m.table.points = 1;
        m.table.replicates = 100;
        m.table.mean = {0.5};
        m.table.mean_se = {NAN};
        m.table.cov = {1.0};
        m.table.cov_se = {0.1};
        const auto rows = csv_rows(moments_csv(m).str());
        REQUIRE(rows.size() == 2);
        CHECK(rows[1][5].empty());
        CHECK(rows[1][8].empty());
        JsonWriter w;
        w.begin_object().key("a").value(1.5).key("b").begin_array().value(true).null().end_array().end_object();
        CHECK(w.str() == "{\n  \"a\": 1.5,\n  \"b\": [\n    true,\n    null\n  ]\n}\n");
    }

    TEST_CASE("config file supplies defaults that flags override") {
        const std::filesystem::path path = std::filesystem::temp_directory_path() / "harmonize_cli_config.json";
        {
            std::ofstream out(path);
            out << R"({"command": "nt", "equation": "wave", "nu": "riesz:0", "t": [3.141592653589793], "psi": [1], "format": "json"})";
        }
        const Output from_file = run_cli({"--config", path.string()});
        CHECK(from_file.code == 0);
        const nlohmann::json j = nlohmann::json::parse(from_file.out);
        CHECK(j["rows"][0]["n_t"].get<double>() == doctest::Approx(M_PI * M_PI).epsilon(1e-8));

        const Output overridden = run_cli({"--config", path.string(), "--equation", "heat", "--t", "1"});
        const nlohmann::json k = nlohmann::json::parse(overridden.out);
        CHECK(k["equation"] == "heat");
        CHECK(k["rows"][0]["n_t"].get<double>() == doctest::Approx(M_PI * (1.0 - std::exp(-2.0))).epsilon(1e-8));

        const RunConfig cfg = parse_args({"check", "--config", path.string()});
        CHECK(cfg.command == "check");
        CHECK(cfg.equation == "wave");

        {
            std::ofstream out(path);
            out << "{\n  \"nu\": riesz\n}";
        }
        const Output broken = run_cli({"--config", path.string()});
        CHECK(broken.code == 2);
        CHECK(broken.err.find("line 2") != std::string::npos);
        std::filesystem::remove(path);
    }

    TEST_CASE("simulate output is deterministic and well formed") {
        const std::vector<std::string> args{"simulate", "--noise", "fbm", "--H", "0.7", "--lambda", "16", "--n", "64",
                                            "--replicates", "5", "--points", "1;2", "--seed", "3"};
        const Output a = run_cli(args);
        const Output b = run_cli(args);
        CHECK(a.code == 0);
        CHECK(a.out == b.out);
        const auto rows = csv_rows(a.out);
        CHECK(rows.size() == 11);
        CHECK(rows[0] == std::vector<std::string>{"replicate", "point", "value"});
        CHECK(rows[2][1] == "2");

        const std::filesystem::path grid = std::filesystem::temp_directory_path() / "harmonize_cli_grid.hgrd";
        std::vector<std::string> with_grid = args;
        with_grid.insert(with_grid.end(), {"--grid-out", grid.string()});
        CHECK(run_cli(with_grid).code == 0);
        CHECK(read_grid(grid.string()).n == 64);
        std::filesystem::remove(grid);
    }

    TEST_CASE("covtest reports the reference covariance") {
        const Output o = run_cli({"covtest", "--noise", "fbm", "--H", "0.5", "--lambda", "64", "--n", "2048",
                                  "--replicates", "4000", "--points", "1;2", "--seed", "1", "--format", "json"});
        CHECK(o.code == 0);
        const nlohmann::json j = nlohmann::json::parse(o.out);
        CHECK(j["schema"] == "harmonize/1");
        const std::string csv = run_cli({"covtest", "--noise", "fbm", "--H", "0.5", "--lambda", "64", "--n", "2048",
                                         "--replicates", "4000", "--points", "1;2", "--seed", "1"})
                                    .out;
        const auto rows = csv_rows(csv);
        // Upper triangle: (0,0), (0,1), (1,1).
        REQUIRE(rows.size() == 4);
        CHECK(rows[0] == std::vector<std::string>{"i", "j", "point_i", "point_j", "mean_i", "mean_se_i", "cov",
                                                  "cov_se", "reference"});
        // Row (0, 1): reference R(1, 2) = 1, estimate within 3 SE + 5%.
        const double cov = std::stod(rows[2][6]);
        const double se = std::stod(rows[2][7]);
        CHECK(std::stod(rows[2][8]) == doctest::Approx(1.0));
        CHECK(std::abs(cov - 1.0) <= 3.0 * se + 0.05);
    }

    TEST_CASE("output file") {
        const std::filesystem::path path = std::filesystem::temp_directory_path() / "harmonize_cli_out.json";
        const Output o = run_cli({"check", "--output", path.string()});
        CHECK(o.code == 0);
        CHECK(o.out.empty());
        std::ifstream in(path);
        const nlohmann::json j = nlohmann::json::parse(in);
        CHECK(j["decision"] == "Yes");
        std::filesystem::remove(path);
    }
}
