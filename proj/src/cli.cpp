#include "contactkit/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "contactkit/classify.hpp"
#include "contactkit/continuation.hpp"
#include "contactkit/geometry.hpp"
#include "contactkit/integrate.hpp"
#include "contactkit/model.hpp"
#include "contactkit/serialize.hpp"

namespace contactkit {
namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_num(const std::string& s, const char* what) {
    try {
        size_t used = 0;
        const double v = std::stod(s, &used);
        while (used < s.size() && (s[used] == ' ' || s[used] == '\t')) ++used;
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError(std::string("cannot parse ") + what + " '" + s + "'");
    }
}

Vec parse_point(const std::string& text) {
    Vec z;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) z.push_back(parse_num(trim(cell), "coordinate"));
    if (z.empty()) throw UsageError("empty point '" + text + "'");
    return z;
}

struct GridAxis {
    double lo = 0.0;
    double hi = 0.0;
    size_t count = 1;
};

std::vector<GridAxis> parse_grid(const std::string& text) {
    std::vector<GridAxis> axes;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const size_t c1 = part.find(':');
        const size_t c2 = c1 == std::string::npos ? c1 : part.find(':', c1 + 1);
        if (c2 == std::string::npos)
            throw UsageError("grid axis '" + part + "' is not of the form min:max:count");
        GridAxis ax;
        ax.lo = parse_num(trim(part.substr(0, c1)), "grid bound");
        ax.hi = parse_num(trim(part.substr(c1 + 1, c2 - c1 - 1)), "grid bound");
        const double count = parse_num(trim(part.substr(c2 + 1)), "grid count");
        if (count < 1 || count != std::floor(count))
            throw UsageError("grid count in '" + part + "' must be an integer >= 1");
        ax.count = static_cast<size_t>(count);
        axes.push_back(ax);
    }
    if (axes.empty()) throw UsageError("empty grid specification");
    return axes;
}

// Row-major expansion, last axis fastest; a one-point axis sits at its lower
// bound.
std::vector<Vec> grid_points(const std::vector<GridAxis>& axes) {
    constexpr size_t kMaxPoints = 10'000'000;
    size_t total = 1;
    for (const GridAxis& a : axes) {
        if (total > kMaxPoints / a.count)
            throw UsageError("grid has more than " + std::to_string(kMaxPoints) + " points");
        total *= a.count;
    }
    std::vector<Vec> pts(total, Vec(axes.size()));
    for (size_t i = 0; i < total; ++i) {
        size_t rem = i;
        for (size_t d = axes.size(); d-- > 0;) {
            const GridAxis& a = axes[d];
            const size_t idx = rem % a.count;
            rem /= a.count;
            pts[i][d] = a.count == 1
                            ? a.lo
                            : a.lo + (a.hi - a.lo) * static_cast<double>(idx) /
                                         static_cast<double>(a.count - 1);
        }
    }
    return pts;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
    for (const std::string& a : args)
        if (a == flag ||
            (a.size() > flag.size() && a.compare(0, flag.size(), flag) == 0 && a[flag.size()] == '='))
            return true;
    return false;
}

// Expands `--config FILE` (key=value lines, '#' comments) into --key=value
// tokens inserted right after the subcommand. Explicit flags win for
// single-valued options; `param` lines merge with --param, command-line
// values overriding same-named parameters.
void expand_config(std::vector<std::string>& args) {
    std::string path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config expects a file path");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<long>(i));
            break;
        }
    }
    if (path.empty()) return;
    if (args.empty()) throw UsageError("--config requires a subcommand");
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open config file '" + path + "'");
    std::vector<std::string> extra;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(line_no) + " is not key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw UsageError("config line " + std::to_string(line_no) + " has an empty key");
        if (key == "config") throw UsageError("config files cannot nest");
        const std::string flag = "--" + key;
        if (key == "param" || !has_flag(args, flag)) extra.push_back(flag + "=" + value);
    }
    args.insert(args.begin() + 1, extra.begin(), extra.end());
}

FactorizedModel load_selected(const std::string& model_arg, const std::string& face,
                              const std::vector<std::string>& param_flags) {
    if (model_arg.empty()) throw UsageError("--model is required");
    std::map<std::string, double> overrides;
    for (const std::string& pv : param_flags) {
        const size_t eq = pv.find('=');
        if (eq == std::string::npos)
            throw UsageError("--param expects name=value, got '" + pv + "'");
        overrides[trim(pv.substr(0, eq))] = parse_num(trim(pv.substr(eq + 1)), "parameter value");
    }
    if (std::filesystem::exists(model_arg)) {
        if (!face.empty()) throw UsageError("--face applies only to built-in models");
        return load_model_from_file(model_arg, overrides);
    }
    return load_model(face.empty() ? model_arg : model_arg + "[" + face + "]", overrides);
}

std::vector<std::string> coord_names(const FactorizedModel& model) {
    if (model.coordinate_names.size() == static_cast<size_t>(model.n))
        return model.coordinate_names;
    std::vector<std::string> names;
    for (int i = 1; i <= model.n; ++i) names.push_back("x" + std::to_string(i));
    return names;
}

void check_dimension(const FactorizedModel& model, size_t got, const char* what) {
    if (got != static_cast<size_t>(model.n))
        throw UsageError(std::string(what) + " has " + std::to_string(got) + " coordinates, model '" +
                         model.name + "' has dimension " + std::to_string(model.n));
}

int emit(const std::string& text, const std::string& output, std::ostream& out,
         std::ostream& err) {
    if (output.empty()) {
        out << text;
        return 0;
    }
    std::ofstream f(output, std::ios::binary);
    if (!f) {
        err << "error: cannot open output file '" << output << "'\n";
        return 1;
    }
    f << text;
    if (!f) {
        err << "error: failed writing output file '" << output << "'\n";
        return 1;
    }
    return 0;
}

struct TolFlags {
    double zero_abs = 1e-8;
    double zero_rel = 1e-6;
    double manifold_dist = 1e-9;
    int max_order = 4;

    Tolerances tolerances() const {
        Tolerances tol;
        tol.zero_abs = zero_abs;
        tol.zero_rel = zero_rel;
        tol.manifold_dist = manifold_dist;
        tol.max_order = max_order;
        return tol;
    }
};

void add_tolerance_flags(CLI::App* sub, TolFlags& t) {
    sub->add_option("--zero-abs", t.zero_abs, "absolute threshold of scaled zero tests")
        ->capture_default_str();
    sub->add_option("--zero-rel", t.zero_rel, "relative threshold of scaled zero tests")
        ->capture_default_str();
    sub->add_option("--manifold-dist", t.manifold_dist,
                    "relative |f| bound of the on-manifold test")
        ->capture_default_str();
    sub->add_option("--max-order", t.max_order, "deepest contact order searched")
        ->capture_default_str();
}

void require_format(const std::string& format, const char* command, const char* expected) {
    if (format != expected)
        throw UsageError(std::string(command) + " emits " + expected + " only, got --format " +
                         format);
}

// ---------------------------------------------------------------------------
// analyze

int cmd_analyze(const FactorizedModel& model, const std::string& point_text,
                const Tolerances& tol, const std::string& output, std::ostream& out,
                std::ostream& err) {
    const Vec seed = parse_point(point_text);
    check_dimension(model, seed.size(), "--point");
    const ContactDiagnostics d = classify_projected(model, seed, tol);
    return emit(diagnostics_json(model, d, tol).dump(2) + "\n", output, out, err);
}

// ---------------------------------------------------------------------------
// scan

int scan_grid(const FactorizedModel& model, const std::string& grid_text, bool project,
              const Tolerances& tol, const std::string& output, std::ostream& out,
              std::ostream& err) {
    const std::vector<GridAxis> axes = parse_grid(grid_text);
    check_dimension(model, axes.size(), "--grid");
    const std::vector<Vec> pts = grid_points(axes);

    std::vector<ScanRow> rows(pts.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (size_t i; (i = next.fetch_add(1)) < pts.size();) {
            ScanRow& row = rows[i];
            row.index = static_cast<long>(i);
            row.point = pts[i];
            try {
                const ContactDiagnostics d =
                    project ? classify_projected(model, pts[i], tol) : classify(model, pts[i], tol);
                row.point = d.z;
                row.verdict = d.classification;
                row.verdict.C0_rank = d.C0_rank;
                row.fold_coefficient = d.fold_coefficient;
                row.has_fold_coefficient = d.chain.projected.size() >= 3;
                row.cusp_coefficient = d.cusp_coefficient;
                row.has_cusp_coefficient = d.chain.projected.size() >= 4;
            } catch (const std::exception& e) {
                row.verdict = Classification{};
                row.verdict.kind = VerdictKind::Inconclusive;
                row.verdict.reason = e.what();
            }
        }
    };
    size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const size_t nthreads = std::min(hw, pts.size());
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(nthreads);
        for (size_t i = 0; i < nthreads; ++i) threads.emplace_back(worker);
        for (std::thread& th : threads) th.join();
    }
    return emit(scan_csv(rows, coord_names(model)), output, out, err);
}

int scan_branch(const FactorizedModel& model, const std::string& seed_text, int max_points,
                int direction, const Tolerances& tol, const std::string& output,
                std::ostream& out, std::ostream& err) {
    const Vec seed = parse_point(seed_text);
    check_dimension(model, seed.size(), "--point");
    ContinuationConfig cfg;
    cfg.tol = tol;
    if (max_points > 0) cfg.max_points = max_points;
    cfg.direction = direction >= 0 ? +1 : -1;
    const Branch br = continue_contact_curve(model, seed, cfg);
    return emit(branch_csv(br, coord_names(model)), output, out, err);
}

// ---------------------------------------------------------------------------
// fibers / simulate

int cmd_fibers(const FactorizedModel& model, const std::vector<Vec>& seeds, double t_back,
               double t_forward, const IntegratorConfig& icfg, const std::string& output,
               std::ostream& out, std::ostream& err) {
    for (const Vec& s : seeds) check_dimension(model, s.size(), "fiber seed");
    const std::vector<Trajectory> fibers = fiber_family(model, seeds, t_back, t_forward, icfg);
    return emit(fibers_csv(fibers, coord_names(model)), output, out, err);
}

int cmd_simulate(const FactorizedModel& model, const std::string& point_text, double t0,
                 double t1, const IntegratorConfig& icfg, const std::string& output,
                 std::ostream& out, std::ostream& err) {
    const Vec z0 = parse_point(point_text);
    check_dimension(model, z0.size(), "--point");
    const Trajectory tr = integrate_full(model, z0, t0, t1, icfg);
    return emit(trajectory_csv(tr, coord_names(model)), output, out, err);
}

// ---------------------------------------------------------------------------
// models

int cmd_models(const std::string& output, std::ostream& out, std::ostream& err) {
    nlohmann::ordered_json root;
    root["schema"] = "contact-kit/1";
    root["names"] = model_names();
    auto arr = nlohmann::ordered_json::array();
    for (const FactorizedModel& md : zoo()) {
        nlohmann::ordered_json j;
        j["name"] = md.name;
        j["n"] = md.n;
        j["k"] = md.k();
        j["m"] = md.m;
        j["eps"] = md.eps;
        j["coordinates"] = coord_names(md);
        auto dom = nlohmann::ordered_json::array();
        for (const auto& [lo, hi] : md.domain_hint)
            dom.push_back(nlohmann::ordered_json::array({lo, hi}));
        j["domain"] = dom;

        auto params = nlohmann::ordered_json::array();
        for (const ParameterSpec& p : md.parameters) {
            nlohmann::ordered_json pj;
            pj["name"] = p.name;
            pj["value"] = p.value;
            pj["constraint"] = p.constraint;
            pj["integer"] = p.integer;
            params.push_back(pj);
        }
        j["parameters"] = params;

        nlohmann::ordered_json known;
        auto cps = nlohmann::ordered_json::array();
        for (const KnownPoint& kp : md.known.contact_points) {
            nlohmann::ordered_json e;
            e["point"] = kp.z;
            e["order"] = kp.order;
            e["slow_generic"] = kp.slow_generic;
            e["label"] = kp.label;
            e["provenance"] = kp.provenance;
            cps.push_back(e);
        }
        known["contact_points"] = cps;
        auto curves = nlohmann::ordered_json::array();
        for (const KnownCurve& kc : md.known.contact_curves) {
            nlohmann::ordered_json e;
            e["label"] = kc.label;
            e["s_range"] = nlohmann::ordered_json::array({kc.s_lo, kc.s_hi});
            e["provenance"] = kc.provenance;
            curves.push_back(e);
        }
        known["contact_curves"] = curves;
        auto eqs = nlohmann::ordered_json::array();
        for (const KnownPoint& kp : md.known.equilibria) {
            nlohmann::ordered_json e;
            e["point"] = kp.z;
            e["label"] = kp.label;
            e["provenance"] = kp.provenance;
            eqs.push_back(e);
        }
        known["equilibria"] = eqs;
        auto coeffs = nlohmann::ordered_json::array();
        for (const KnownScalar& ks : md.known.coefficients) {
            nlohmann::ordered_json e;
            e["label"] = ks.label;
            e["kind"] = ks.kind;
            e["at"] = ks.at;
            e["value"] = ks.value;
            e["provenance"] = ks.provenance;
            coeffs.push_back(e);
        }
        known["coefficients"] = coeffs;
        j["known_answers"] = known;
        arr.push_back(j);
    }
    root["models"] = arr;
    return emit(root.dump(2) + "\n", output, out, err);
}

// ---------------------------------------------------------------------------
// verify

struct CheckCounter {
    int total = 0;
    int failed = 0;
};

void check_line(std::ostream& rep, CheckCounter& cc, const std::string& label, bool ok,
                const std::string& detail = "") {
    ++cc.total;
    if (!ok) ++cc.failed;
    rep << "  [" << (ok ? "ok" : "FAIL") << "] " << label;
    if (!ok && !detail.empty()) rep << " -- " << detail;
    rep << "\n";
}

bool matches(double got, double want) {
    return std::fabs(got - want) <= 1e-8 + 1e-6 * std::fabs(want);
}

void verify_one(const FactorizedModel& model, int npoints, std::uint64_t seed,
                std::ostream& rep, CheckCounter& cc) {
    rep << "== " << model.name << " ==\n";

    std::mt19937_64 rng(seed);
    std::vector<Vec> samples;
    samples.reserve(static_cast<size_t>(npoints));
    for (int i = 0; i < npoints; ++i) {
        Vec z(static_cast<size_t>(model.n));
        for (int d = 0; d < model.n; ++d) {
            double lo = -1.0, hi = 1.0;
            if (model.domain_hint.size() == static_cast<size_t>(model.n)) {
                lo = model.domain_hint[static_cast<size_t>(d)].first;
                hi = model.domain_hint[static_cast<size_t>(d)].second;
            }
            z[static_cast<size_t>(d)] = std::uniform_real_distribution<double>(lo, hi)(rng);
        }
        samples.push_back(std::move(z));
    }
    {
        const ProviderReport pr = validate_provider(model.provider, samples);
        std::string detail;
        for (const TensorCheck& c : pr.checks)
            if (c.flagged)
                detail += (detail.empty() ? "" : ", ") + c.tensor + " (order " +
                          std::to_string(c.order) + ")";
        check_line(rep, cc,
                   "analytic tensors vs finite differences (" + std::to_string(npoints) +
                       " sample points)",
                   pr.passed, detail);
    }

    const Tolerances tol;
    for (const KnownPoint& kp : model.known.contact_points) {
        bool ok = false;
        std::string detail;
        try {
            const ContactDiagnostics d = classify(model, kp.z, tol);
            ok = d.classification.kind == VerdictKind::Contact &&
                 d.classification.order == kp.order &&
                 d.classification.slow_generic == kp.slow_generic;
            if (!ok)
                detail = "got " + verdict_name(d.classification.kind) + " order " +
                         std::to_string(d.classification.order);
        } catch (const std::exception& e) {
            detail = e.what();
        }
        check_line(rep, cc, "contact point '" + kp.label + "' [" + kp.provenance + "]", ok,
                   detail);
    }

    for (const KnownPoint& kp : model.known.equilibria) {
        bool ok = false;
        std::string detail;
        try {
            const EquilibriumResult eq = desingularized_equilibria(model, kp.z);
            const double dist = inf_norm(axpy(-1.0, kp.z, eq.z));
            ok = dist <= 1e-7;
            if (!ok) detail = "converged " + format_double(dist) + " away";
        } catch (const std::exception& e) {
            detail = e.what();
        }
        check_line(rep, cc, "equilibrium '" + kp.label + "' [" + kp.provenance + "]", ok, detail);
    }

    for (const KnownScalar& ks : model.known.coefficients) {
        bool ok = false;
        std::string detail;
        try {
            if (ks.kind == "fold_coefficient") {
                const double got = fold_test(model, ks.at, tol).coefficient;
                ok = matches(got, ks.value);
                if (!ok) detail = "got " + format_double(got) + ", want " + format_double(ks.value);
            } else if (ks.kind == "third_order_coefficient") {
                const double got = cusp_test(model, ks.at, tol).third_order_coefficient;
                ok = matches(got, ks.value);
                if (!ok) detail = "got " + format_double(got) + ", want " + format_double(ks.value);
            } else if (ks.kind == "eigenvalue") {
                const SpectrumResult sp = nontrivial_spectrum(model, ks.at);
                double best = std::numeric_limits<double>::infinity();
                for (const std::complex<double>& ev : sp.eigenvalues)
                    best = std::min(best, std::abs(ev - std::complex<double>(ks.value)));
                ok = best <= 1e-8 + 1e-6 * std::fabs(ks.value);
                if (!ok) detail = "nearest eigenvalue " + format_double(best) + " away";
            } else {
                detail = "unknown coefficient kind '" + ks.kind + "'";
            }
        } catch (const std::exception& e) {
            detail = e.what();
        }
        check_line(rep, cc, ks.kind + " '" + ks.label + "' [" + ks.provenance + "]", ok, detail);
    }

    for (const KnownCurve& kc : model.known.contact_curves) {
        const int nsamp = 9;
        bool ok = true;
        std::string detail;
        for (int i = 0; i < nsamp && ok; ++i) {
            const double s = kc.s_lo + (kc.s_hi - kc.s_lo) * i / (nsamp - 1);
            const Vec z = kc.point(s);
            try {
                const ContactDiagnostics d = classify(model, z, tol);
                if (d.classification.kind != VerdictKind::Contact) {
                    ok = false;
                    detail = "verdict " + verdict_name(d.classification.kind) + " at s=" +
                             format_double(s);
                    break;
                }
                if (kc.fold_coefficient) {
                    const double want = kc.fold_coefficient(s);
                    // At an embedded higher-order point the fold coefficient
                    // crosses zero; only generic samples pin order 1.
                    if (std::fabs(want) > 1e-6 &&
                        (d.classification.order != 1 || !matches(d.fold_coefficient, want))) {
                        ok = false;
                        detail = "fold coefficient " + format_double(d.fold_coefficient) +
                                 ", want " + format_double(want) + " at s=" + format_double(s);
                    }
                }
            } catch (const std::exception& e) {
                ok = false;
                detail = std::string(e.what()) + " at s=" + format_double(s);
            }
        }
        check_line(rep, cc,
                   "contact curve '" + kc.label + "' [" + kc.provenance + "] (" +
                       std::to_string(nsamp) + " samples)",
                   ok, detail);
    }
}

int cmd_verify(const std::string& model_arg, const std::string& face,
               const std::vector<std::string>& params, int npoints, std::uint64_t seed,
               const std::string& output, std::ostream& out, std::ostream& err) {
    std::vector<FactorizedModel> models;
    if (!model_arg.empty()) {
        models.push_back(load_selected(model_arg, face, params));
    } else {
        for (const std::string& name : model_names()) {
            FactorizedModel md = load_model(name);
            // "mitotic" is an alias of its X=0 face; list each model once.
            const auto dup = std::find_if(models.begin(), models.end(),
                                          [&md](const FactorizedModel& m) { return m.name == md.name; });
            if (dup == models.end()) models.push_back(std::move(md));
        }
    }
    std::ostringstream rep;
    CheckCounter cc;
    for (const FactorizedModel& md : models) verify_one(md, npoints, seed, rep, cc);
    if (cc.failed == 0)
        rep << "all " << cc.total << " checks passed\n";
    else
        rep << cc.failed << " of " << cc.total << " checks FAILED\n";
    const int rc = emit(rep.str(), output, out, err);
    if (rc != 0) return rc;
    return cc.failed == 0 ? 0 : 2;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    try {
        expand_config(args);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    CLI::App app{"classification and continuation toolkit for factorized slow-fast systems",
                 "contact-kit"};
    app.require_subcommand(1);

    struct Common {
        std::string model, face, point, grid, output, format, config;
        std::vector<std::string> params;
    };
    auto add_common = [](CLI::App* sub, Common& c, const char* default_format) {
        sub->add_option("--model", c.model,
                        "built-in model name or path of a model definition file");
        sub->add_option("--face", c.face, "face qualifier for built-in face-local models");
        sub->add_option("--param", c.params, "parameter override name=value (repeatable)");
        sub->add_option("--output", c.output, "write to this file instead of stdout");
        c.format = default_format;
        sub->add_option("--format", c.format, "output format")->capture_default_str();
        sub->add_option("--config", c.config,
                        "key=value file of defaults; explicit flags take precedence");
    };

    Common an;
    TolFlags an_tol;
    CLI::App* analyze = app.add_subcommand(
        "analyze", "classify one point: manifold check, spectrum, contact order, coefficients");
    add_common(analyze, an, "json");
    analyze->add_option("--point", an.point, "seed coordinates, comma-separated")->required();
    add_tolerance_flags(analyze, an_tol);

    Common sc;
    TolFlags sc_tol;
    bool sc_project = false;
    int sc_max_points = 0;
    int sc_direction = +1;
    CLI::App* scan = app.add_subcommand(
        "scan", "classify a grid of points, or continue the contact curve from a seed");
    add_common(scan, sc, "csv");
    scan->add_option("--grid", sc.grid, "per-axis min:max:count, comma-separated (grid mode)");
    scan->add_option("--point", sc.point, "contact-curve seed (branch mode)");
    scan->add_flag("--project", sc_project,
                   "project each grid point onto the critical manifold before classifying");
    scan->add_option("--max-points", sc_max_points, "branch mode: maximum curve points");
    scan->add_option("--direction", sc_direction, "branch mode: initial orientation, +1 or -1")
        ->capture_default_str();
    add_tolerance_flags(scan, sc_tol);

    Common fi;
    double fi_t_back = -5.0, fi_t_forward = 5.0;
    double fi_abs_tol = 1e-10, fi_rel_tol = 1e-8, fi_max_step = 0.0;
    CLI::App* fibers =
        app.add_subcommand("fibers", "integrate fast fibers of the desingularized layer field");
    add_common(fibers, fi, "csv");
    fibers->add_option("--grid", fi.grid, "seed grid, per-axis min:max:count");
    fibers->add_option("--point", fi.point, "single seed");
    fibers->add_option("--t-back", fi_t_back, "backward extent (<= 0)")->capture_default_str();
    fibers->add_option("--t-forward", fi_t_forward, "forward extent (>= 0)")
        ->capture_default_str();
    fibers->add_option("--abs-tol", fi_abs_tol, "absolute step error tolerance")
        ->capture_default_str();
    fibers->add_option("--rel-tol", fi_rel_tol, "relative step error tolerance")
        ->capture_default_str();
    fibers->add_option("--max-step", fi_max_step, "step-size cap (0: span/10)");

    Common si;
    double si_t0 = 0.0, si_t1 = 0.0, si_eps = 0.0;
    double si_abs_tol = 1e-10, si_rel_tol = 1e-8, si_max_step = 0.0;
    CLI::App* simulate =
        app.add_subcommand("simulate", "integrate the full slow-fast system z' = Nf + eps G");
    add_common(simulate, si, "csv");
    simulate->add_option("--point", si.point, "initial state, comma-separated")->required();
    simulate->add_option("--t0", si_t0, "start time")->capture_default_str();
    simulate->add_option("--t1", si_t1, "end time")->required();
    CLI::Option* eps_opt = simulate->add_option("--eps", si_eps, "override the model's eps");
    simulate->add_option("--abs-tol", si_abs_tol, "absolute step error tolerance")
        ->capture_default_str();
    simulate->add_option("--rel-tol", si_rel_tol, "relative step error tolerance")
        ->capture_default_str();
    simulate->add_option("--max-step", si_max_step, "step-size cap (0: span/10)");

    Common mo;
    CLI::App* models_cmd = app.add_subcommand(
        "models", "list built-in models, parameters, domains, and known answers");
    add_common(models_cmd, mo, "json");

    Common ve;
    int ve_points = 50;
    std::uint64_t ve_seed = 0;
    CLI::App* verify = app.add_subcommand(
        "verify",
        "check analytic tensors against finite differences and replay known answers");
    add_common(verify, ve, "text");
    verify->add_option("--points", ve_points, "random sample points per model")
        ->capture_default_str();
    verify->add_option("--seed", ve_seed, "random seed for the sample points")
        ->capture_default_str();

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 1;
    }

    try {
        for (const Common* c : {&an, &sc, &fi, &si, &mo, &ve})
            if (!c->config.empty()) throw UsageError("only one --config is supported");

        if (app.got_subcommand(analyze)) {
            require_format(an.format, "analyze", "json");
            const FactorizedModel model = load_selected(an.model, an.face, an.params);
            return cmd_analyze(model, an.point, an_tol.tolerances(), an.output, out, err);
        }
        if (app.got_subcommand(scan)) {
            require_format(sc.format, "scan", "csv");
            if (sc.grid.empty() == sc.point.empty())
                throw UsageError("scan needs exactly one of --grid (grid mode) or --point "
                                 "(branch mode)");
            const FactorizedModel model = load_selected(sc.model, sc.face, sc.params);
            if (!sc.grid.empty())
                return scan_grid(model, sc.grid, sc_project, sc_tol.tolerances(), sc.output, out,
                                 err);
            return scan_branch(model, sc.point, sc_max_points, sc_direction, sc_tol.tolerances(),
                               sc.output, out, err);
        }
        if (app.got_subcommand(fibers)) {
            require_format(fi.format, "fibers", "csv");
            if (fi.grid.empty() == fi.point.empty())
                throw UsageError("fibers needs exactly one of --grid or --point");
            const FactorizedModel model = load_selected(fi.model, fi.face, fi.params);
            std::vector<Vec> seeds;
            if (!fi.grid.empty())
                seeds = grid_points(parse_grid(fi.grid));
            else
                seeds.push_back(parse_point(fi.point));
            IntegratorConfig icfg;
            icfg.abs_tol = fi_abs_tol;
            icfg.rel_tol = fi_rel_tol;
            icfg.max_step = fi_max_step;
            return cmd_fibers(model, seeds, fi_t_back, fi_t_forward, icfg, fi.output, out, err);
        }
        if (app.got_subcommand(simulate)) {
            require_format(si.format, "simulate", "csv");
            FactorizedModel model = load_selected(si.model, si.face, si.params);
            if (eps_opt->count() > 0) model.eps = si_eps;
            IntegratorConfig icfg;
            icfg.abs_tol = si_abs_tol;
            icfg.rel_tol = si_rel_tol;
            icfg.max_step = si_max_step;
            return cmd_simulate(model, si.point, si_t0, si_t1, icfg, si.output, out, err);
        }
        if (app.got_subcommand(models_cmd)) {
            require_format(mo.format, "models", "json");
            return cmd_models(mo.output, out, err);
        }
        if (app.got_subcommand(verify))
            return cmd_verify(ve.model, ve.face, ve.params, ve_points, ve_seed, ve.output, out,
                              err);
        err << "error: no subcommand\n";
        return 1;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const UnknownModelError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ModelParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace contactkit
