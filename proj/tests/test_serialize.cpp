#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "contactkit/classify.hpp"
#include "contactkit/continuation.hpp"
#include "contactkit/model.hpp"
#include "contactkit/serialize.hpp"
#include "doctest.h"

using namespace contactkit;

TEST_CASE("format_double round-trips doubles exactly") {
    const double values[] = {0.0,
                             -0.0,
                             0.1,
                             1.0 / 3.0,
                             2.0 / 3.0,
                             1e-300,
                             1e300,
                             3.141592653589793,
                             6.02214076e23,
                             -1.2345678901234567e-8,
                             5e-324,
                             std::numeric_limits<double>::max(),
                             std::numeric_limits<double>::infinity()};
    for (double v : values) {
        const std::string s = format_double(v);
        CHECK(s.find(',') == std::string::npos);
        const double back = std::strtod(s.c_str(), nullptr);
        CHECK(back == v);
    }
    CHECK(std::isnan(std::strtod(format_double(std::nan("")).c_str(), nullptr)));
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.25) == "-2.25");
}

TEST_CASE("diagnostics_json carries the full record for a cusp point") {
    FactorizedModel model = load_model("three_component");
    Tolerances tol;
    const ContactDiagnostics d = classify(model, {0.5, 0.0, 1.0}, tol);
    const nlohmann::ordered_json j = diagnostics_json(model, d, tol);

    CHECK(j.at("schema") == "contact-kit/1");
    CHECK(j.at("model") == "three_component");
    CHECK(j.at("parameters").at("alpha1").get<double>() == doctest::Approx(0.2));
    CHECK(j.at("parameters").at("alpha2").get<double>() == doctest::Approx(2.0));
    CHECK(j.at("parameters").contains("eps"));

    CHECK(j.at("point").get<std::vector<double>>() == std::vector<double>{0.5, 0.0, 1.0});
    CHECK(j.at("projected_point").get<std::vector<double>>() ==
          std::vector<double>{0.5, 0.0, 1.0});

    CHECK(j.at("verdict").at("kind") == "contact");
    CHECK(j.at("verdict").at("order").get<int>() == 2);
    CHECK(j.at("verdict").at("slow_generic").get<bool>());
    CHECK(j.at("verdict").at("flags").is_array());

    REQUIRE(j.at("eigenvalues").size() == 1);
    CHECK(std::fabs(j.at("eigenvalues")[0][0].get<double>()) < 1e-12);
    CHECK(j.at("eigenvalues")[0][1].get<double>() == 0.0);

    CHECK(j.at("l").get<std::vector<double>>().size() == 1);
    CHECK(j.at("r").get<std::vector<double>>().size() == 1);

    REQUIRE(j.at("chain").size() >= 4);
    CHECK(j.at("chain")[0].at("order").get<int>() == 0);
    CHECK(std::fabs(j.at("chain")[0].at("l_projected").get<double>()) < 1e-12);
    CHECK(std::fabs(j.at("chain")[2].at("l_projected").get<double>()) < 1e-10);
    CHECK(j.at("chain")[3].at("full_norm").get<double>() > 0.0);

    CHECK(std::fabs(j.at("fold_coefficient").get<double>()) < 1e-10);
    CHECK(j.at("cusp_coefficient").get<double>() == doctest::Approx(0.04).epsilon(1e-8));

    REQUIRE(j.at("C0").at("rows").size() == 2);
    CHECK(j.at("C0").at("rows")[0].size() == 3);
    CHECK(j.at("C0").at("rank").get<int>() == 2);

    CHECK(j.at("tolerances").at("zero_abs").get<double>() == 1e-8);
    CHECK(j.at("tolerances").at("max_order").get<int>() == 4);
}

TEST_CASE("diagnostics_json marks unavailable coefficients as null") {
    FactorizedModel model = load_model("planar_parabola");
    Tolerances tol;
    const ContactDiagnostics d = classify(model, {5.0, 5.0}, tol);  // off the manifold
    REQUIRE(d.classification.kind == VerdictKind::NotOnCriticalManifold);
    const nlohmann::ordered_json j = diagnostics_json(model, d, tol);
    CHECK(j.at("fold_coefficient").is_null());
    CHECK(j.at("cusp_coefficient").is_null());
    CHECK(j.at("verdict").at("kind") == "not_on_critical_manifold");
}

TEST_CASE("diagnostics_json output is byte-identical across repeated runs") {
    Tolerances tol;
    std::string first;
    for (int rep = 0; rep < 3; ++rep) {
        FactorizedModel model = load_model("three_component");
        const ContactDiagnostics d = classify(model, {0.5, 0.0, 1.0}, tol);
        const std::string dumped = diagnostics_json(model, d, tol).dump(2);
        if (rep == 0)
            first = dumped;
        else
            CHECK(dumped == first);
    }
    CHECK(first.find("\"schema\": \"contact-kit/1\"") != std::string::npos);
}

TEST_CASE("projected point parsed back from JSON reproduces the verdict") {
    FactorizedModel model = load_model("mitotic[X=0]");
    Tolerances tol;
    const ContactDiagnostics d = classify_projected(model, {0.02, 0.69, 0.52}, tol);
    const std::string dumped = diagnostics_json(model, d, tol).dump();

    const auto parsed = nlohmann::json::parse(dumped);
    const Vec again = parsed.at("projected_point").get<Vec>();
    const ContactDiagnostics d2 = classify(model, again, tol);
    CHECK(d2.classification.kind == d.classification.kind);
    CHECK(d2.classification.order == d.classification.order);
    CHECK(d2.classification.slow_generic == d.classification.slow_generic);
}

TEST_CASE("trajectory_csv emits header plus one row per sample") {
    Trajectory tr;
    tr.times = {0.0, 0.5};
    tr.states = {{1.0, 2.0}, {3.0, 4.0}};
    CHECK(trajectory_csv(tr, {"x", "y"}) == "t,x,y\n0,1,2\n0.5,3,4\n");
}

TEST_CASE("fibers_csv prefixes rows with the fiber id") {
    Trajectory a;
    a.times = {0.0};
    a.states = {{1.0, -1.0}};
    Trajectory b;
    b.times = {0.25};
    b.states = {{0.125, 8.0}};
    CHECK(fibers_csv({a, b}, {"u", "v"}) ==
          "fiber,t,u,v\n0,0,1,-1\n1,0.25,0.125,8\n");
}

TEST_CASE("scan_csv leaves unavailable coefficients empty") {
    ScanRow row;
    row.index = 7;
    row.point = {0.5, 0.0};
    row.verdict.kind = VerdictKind::NormallyHyperbolic;
    row.verdict.order = 0;
    row.verdict.slow_generic = false;
    row.verdict.C0_rank = 0;
    ScanRow fold;
    fold.index = 8;
    fold.point = {0.25, 0.0};
    fold.verdict.kind = VerdictKind::Contact;
    fold.verdict.order = 1;
    fold.verdict.slow_generic = true;
    fold.verdict.C0_rank = 1;
    fold.fold_coefficient = 2.5;
    fold.has_fold_coefficient = true;
    const std::string csv = scan_csv({row, fold}, {"x", "y"});
    CHECK(csv ==
          "index,x,y,verdict,order,slow_generic,c0_rank,fold_coefficient,cusp_coefficient\n"
          "7,0.5,0,normally_hyperbolic,0,0,0,,\n"
          "8,0.25,0,contact,1,1,1,2.5,\n");
}

TEST_CASE("branch_csv merges special points by arclength") {
    FactorizedModel model = load_model("three_component");
    ContinuationConfig cfg;
    cfg.max_points = 400;
    const Branch br = continue_contact_curve(model, {0.5, 0.0, 0.2}, cfg);
    REQUIRE(br.special_points.size() == 1);

    const std::string csv = branch_csv(br, {"x", "y", "z"});
    std::vector<std::string> lines;
    size_t pos = 0;
    while (pos < csv.size()) {
        const size_t nl = csv.find('\n', pos);
        lines.push_back(csv.substr(pos, nl - pos));
        pos = nl + 1;
    }
    CHECK(lines[0] ==
          "index,arclength,x,y,z,verdict,order,slow_generic,fold_coefficient,special");
    CHECK(lines.size() == 1 + br.points.size() + br.special_points.size());

    int special_rows = 0;
    double prev_arclength = -1.0;
    for (size_t i = 1; i < lines.size(); ++i) {
        std::vector<std::string> cells;
        size_t start = 0;
        while (true) {
            const size_t comma = lines[i].find(',', start);
            cells.push_back(lines[i].substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        REQUIRE(cells.size() == 10);
        CHECK(cells[0] == std::to_string(i - 1));
        const double s = std::strtod(cells[1].c_str(), nullptr);
        CHECK(s >= prev_arclength);
        prev_arclength = s;
        if (cells[9] == "1") {
            ++special_rows;
            CHECK(cells[8].empty());        // no fold coefficient on event rows
            CHECK(cells[5] == "contact");   // located cusp verdict
            CHECK(cells[6] == "2");
        } else {
            CHECK_FALSE(cells[8].empty());
        }
    }
    CHECK(special_rows == 1);
}
