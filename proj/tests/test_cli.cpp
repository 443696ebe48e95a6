#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "contactkit/cli.hpp"
#include "doctest.h"
#include "json.hpp"

using nlohmann::json;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    std::ostringstream out, err;
    CliResult r;
    r.code = contactkit::run_cli(std::move(args), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

struct TempFile {
    std::string path;
    TempFile(const std::string& name, const std::string& content) : path(name) {
        std::ofstream f(path);
        f << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
        const size_t comma = line.find(',', start);
        cells.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

}  // namespace

TEST_CASE("analyze emits the documented JSON record and exit code 0") {
    const CliResult r = run({"analyze", "--model", "three_component", "--point", "0.5,0,1"});
    REQUIRE(r.code == 0);
    CHECK(r.err.empty());
    const json j = json::parse(r.out);
    CHECK(j.at("schema") == "contact-kit/1");
    CHECK(j.at("model") == "three_component");
    CHECK(j.at("verdict").at("kind") == "contact");
    CHECK(j.at("verdict").at("order") == 2);
    CHECK(j.at("verdict").at("slow_generic") == true);
    CHECK(j.at("cusp_coefficient").get<double>() == doctest::Approx(0.04).epsilon(1e-8));
    CHECK(j.at("C0").at("rank") == 2);
}

TEST_CASE("analyze round trip: re-feeding projected_point repeats the verdict") {
    const CliResult first =
        run({"analyze", "--model", "planar_parabola", "--point", "0.3,0.95"});
    REQUIRE(first.code == 0);
    const json j1 = json::parse(first.out);
    const std::vector<double> zp = j1.at("projected_point").get<std::vector<double>>();

    // 17-significant-digit text keeps the round trip exact.
    std::ostringstream ps;
    ps.precision(17);
    ps << zp[0] << "," << zp[1];
    const CliResult second = run({"analyze", "--model", "planar_parabola", "--point", ps.str()});
    REQUIRE(second.code == 0);
    const json j2 = json::parse(second.out);
    CHECK(j2.at("verdict") == j1.at("verdict"));
    CHECK(j2.at("projected_point") == j1.at("projected_point"));
}

TEST_CASE("analyze classifies the normally hyperbolic apex of the parabola") {
    const CliResult r = run({"analyze", "--model", "planar_parabola", "--point", "0,1"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("verdict").at("kind") == "normally_hyperbolic");
    CHECK(j.at("eigenvalues")[0][0].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("identical invocations produce byte-identical output") {
    const std::vector<std::string> scan_args = {"scan", "--model", "three_component",
                                                "--grid", "0:2:4,-0.5:2:4,0:2:4"};
    const CliResult a = run(scan_args);
    const CliResult b = run(scan_args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);

    const std::vector<std::string> verify_args = {"verify", "--model", "planar_parabola",
                                                  "--seed", "42", "--points", "20"};
    const CliResult va = run(verify_args);
    const CliResult vb = run(verify_args);
    REQUIRE(va.code == 0);
    CHECK(va.out == vb.out);
}

TEST_CASE("grid scan rows are ordered by grid index with a stable header") {
    const CliResult r =
        run({"scan", "--model", "planar_parabola", "--grid", "0:2:5,-1:1:3"});
    REQUIRE(r.code == 0);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() == 1 + 15);
    CHECK(lines[0] ==
          "index,x,y,verdict,order,slow_generic,c0_rank,fold_coefficient,cusp_coefficient");
    for (size_t i = 1; i < lines.size(); ++i)
        CHECK(split_cells(lines[i])[0] == std::to_string(i - 1));
    // (0, 1) lies on the critical manifold and is normally hyperbolic.
    CHECK(split_cells(lines[3])[3] == "normally_hyperbolic");
    // (0, -1) does not.
    CHECK(split_cells(lines[1])[3] == "not_on_critical_manifold");
}

TEST_CASE("projected grid scan classifies manifold points") {
    const CliResult r = run({"scan", "--model", "planar_parabola", "--grid",
                             "0.25:0.35:2,0.9:1:2", "--project"});
    REQUIRE(r.code == 0);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() == 5);
    for (size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_cells(lines[i]);
        CHECK(cells[3] == "normally_hyperbolic");
        // The emitted point is the projection: y = 1 - x^2 on the manifold.
        const double x = std::strtod(cells[1].c_str(), nullptr);
        const double y = std::strtod(cells[2].c_str(), nullptr);
        CHECK(y == doctest::Approx(1.0 - x * x).epsilon(1e-9));
    }
}

TEST_CASE("branch scan emits arclength and flags the cusp row") {
    const CliResult r = run({"scan", "--model", "three_component", "--point", "0.5,0,0.2",
                             "--max-points", "400"});
    REQUIRE(r.code == 0);
    const auto lines = split_lines(r.out);
    CHECK(lines[0] ==
          "index,arclength,x,y,z,verdict,order,slow_generic,fold_coefficient,special");
    int specials = 0;
    for (size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_cells(lines[i]);
        REQUIRE(cells.size() == 10);
        if (cells[9] == "1") {
            ++specials;
            const double z = std::strtod(cells[4].c_str(), nullptr);
            CHECK(z == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
    CHECK(specials == 1);
}

TEST_CASE("simulate with an eps override of zero freezes on-manifold states") {
    const CliResult r = run({"simulate", "--model", "three_component", "--point", "0.5,0,0.3",
                             "--t1", "1", "--eps", "0"});
    REQUIRE(r.code == 0);
    const auto lines = split_lines(r.out);
    CHECK(lines[0] == "t,x,y,z");
    REQUIRE(lines.size() >= 3);
    for (size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_cells(lines[i]);
        REQUIRE(cells.size() == 4);
        CHECK(cells[1] == "0.5");
        CHECK(cells[2] == "0");
        CHECK(cells[3] == "0.29999999999999999");
    }
}

TEST_CASE("fibers command emits one block per seed") {
    const CliResult r = run({"fibers", "--model", "planar_parabola", "--grid", "0.2:0.4:2,0.8:0.8:1",
                             "--t-back=-0.5", "--t-forward", "0.5"});
    REQUIRE(r.code == 0);
    const auto lines = split_lines(r.out);
    CHECK(lines[0] == "fiber,t,x,y");
    bool saw0 = false, saw1 = false;
    for (size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_cells(lines[i]);
        if (cells[0] == "0") saw0 = true;
        if (cells[0] == "1") saw1 = true;
    }
    CHECK(saw0);
    CHECK(saw1);
}

TEST_CASE("a model definition file behaves like the matching built-in") {
    const TempFile file("cli_planar_clone.model", R"(
# planar fold example in file form
n = 2
k = 1
name = planar_clone
coords = x y
f[1] = y + x^2 - 1
N[1][1] = x - 2
N[2][1] = 1
domain = -2:2 -2:2
)");
    const std::string fold_x = "0.29289321881345248";  // (2 - sqrt 2)/2
    const CliResult custom =
        run({"analyze", "--model", file.path, "--point", fold_x + ",0.91421356237309515"});
    REQUIRE(custom.code == 0);
    const json jc = json::parse(custom.out);
    CHECK(jc.at("model") == "planar_clone");
    CHECK(jc.at("verdict").at("kind") == "contact");
    CHECK(jc.at("verdict").at("order") == 1);
    CHECK(jc.at("fold_coefficient").get<double>() ==
          doctest::Approx(2.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-10));

    const CliResult zoo =
        run({"analyze", "--model", "planar_parabola", "--point", fold_x + ",0.91421356237309515"});
    REQUIRE(zoo.code == 0);
    const json jz = json::parse(zoo.out);
    CHECK(jc.at("verdict") == jz.at("verdict"));
    CHECK(jc.at("fold_coefficient").get<double>() ==
          doctest::Approx(jz.at("fold_coefficient").get<double>()).epsilon(1e-12));
}

TEST_CASE("config file supplies defaults and explicit flags win") {
    const TempFile cfg("cli_defaults.cfg", R"(
# scan defaults
model = three_component
point = 0.5,0,0.2
max-points = 50
)");
    const CliResult from_cfg = run({"scan", "--config", cfg.path});
    REQUIRE(from_cfg.code == 0);
    const CliResult spelled_out = run({"scan", "--model", "three_component", "--point",
                                       "0.5,0,0.2", "--max-points", "50"});
    CHECK(from_cfg.out == spelled_out.out);

    const CliResult overridden = run({"scan", "--config", cfg.path, "--max-points", "3"});
    REQUIRE(overridden.code == 0);
    CHECK(split_lines(overridden.out).size() == 1 + 3);
}

TEST_CASE("config parameters merge and command-line parameters override") {
    const TempFile cfg("cli_params.cfg", "param=alpha1=0.5\nparam=alpha3=0.3\n");
    const CliResult r = run({"analyze", "--model", "three_component", "--point", "0.5,0,1",
                             "--config", cfg.path, "--param", "alpha1=0.2"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("parameters").at("alpha1").get<double>() == 0.2);
    CHECK(j.at("parameters").at("alpha3").get<double>() == 0.3);
}

TEST_CASE("--output writes the same bytes as stdout") {
    const std::string path = "cli_out.json";
    const CliResult to_stdout =
        run({"analyze", "--model", "cusp_normal_form", "--point", "0,0,0"});
    const CliResult to_file = run({"analyze", "--model", "cusp_normal_form", "--point", "0,0,0",
                                   "--output", path});
    REQUIRE(to_file.code == 0);
    CHECK(to_file.out.empty());
    std::ifstream f(path, std::ios::binary);
    std::stringstream content;
    content << f.rdbuf();
    CHECK(content.str() == to_stdout.out);
    std::remove(path.c_str());
}

TEST_CASE("models lists the zoo with provenance-tagged known answers") {
    const CliResult r = run({"models"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("schema") == "contact-kit/1");
    const auto names = j.at("names").get<std::vector<std::string>>();
    CHECK(std::find(names.begin(), names.end(), "mitotic[M=1]") != names.end());
    REQUIRE(j.at("models").size() == 5);
    for (const auto& m : j.at("models")) {
        CHECK(m.contains("known_answers"));
        CHECK(m.at("n").get<int>() >= 2);
    }
    const auto& planar = j.at("models")[0];
    CHECK(planar.at("name") == "planar_parabola");
    const auto& cp = planar.at("known_answers").at("contact_points");
    REQUIRE(cp.size() >= 2);
    for (const auto& p : cp) CHECK(p.at("provenance").is_string());
}

TEST_CASE("verify reports all checks green for the zoo") {
    const CliResult r = run({"verify", "--seed", "7", "--points", "25"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("all ") != std::string::npos);
    CHECK(r.out.find("checks passed") != std::string::npos);
    // one section per distinct model: 4 plain + 4 mitotic faces
    size_t sections = 0, pos = 0;
    while ((pos = r.out.find("== ", pos)) != std::string::npos) {
        ++sections;
        pos += 3;
    }
    CHECK(sections == 8);
}

TEST_CASE("usage errors exit 1, computational failures exit 2") {
    CHECK(run({"analyze", "--model", "nosuch_model", "--point", "0,0"}).code == 1);
    CHECK(run({"analyze", "--model", "planar_parabola"}).code == 1);            // missing --point
    CHECK(run({"analyze", "--model", "planar_parabola", "--point", "0,1", "--format", "csv"}).code ==
          1);
    CHECK(run({"scan", "--model", "planar_parabola"}).code == 1);  // neither grid nor point
    CHECK(run({"scan", "--model", "planar_parabola", "--grid", "0:1:3", "--point", "0,1"}).code ==
          1);
    CHECK(run({"analyze", "--model", "three_component", "--point", "0.5,0,1", "--param",
               "alpha2=0.5"})
              .code == 1);  // violates alpha2 > 1
    CHECK(run({"nope"}).code == 1);
    CHECK(run({}).code == 1);
    CHECK(run({"--help"}).code == 0);

    const TempFile blowup("cli_blowup.model", R"(
n = 1
k = 0
f[1] = x1^2
N[1][1] = 1
domain = -4:4
)");
    const CliResult r =
        run({"simulate", "--model", blowup.path, "--point", "2", "--t1", "2"});
    CHECK(r.code == 2);
    CHECK(r.out.empty());
    CHECK_FALSE(r.err.empty());
}
