#include "contactkit/serialize.hpp"

#include <algorithm>
#include <charconv>

namespace contactkit {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

nlohmann::ordered_json matrix_rows(const Matrix& M) {
    auto rows = nlohmann::ordered_json::array();
    for (int i = 0; i < M.rows(); ++i) rows.push_back(M.row(i));
    return rows;
}

void append_row(std::string& out, const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += fields[i];
    }
    out += '\n';
}

std::vector<std::string> csv_header(const std::vector<std::string>& head,
                                    const std::vector<std::string>& coords,
                                    const std::vector<std::string>& tail = {}) {
    std::vector<std::string> h = head;
    h.insert(h.end(), coords.begin(), coords.end());
    h.insert(h.end(), tail.begin(), tail.end());
    return h;
}

void append_trajectory_rows(std::string& out, const Trajectory& tr,
                            const std::string& prefix) {
    for (size_t i = 0; i < tr.times.size(); ++i) {
        std::vector<std::string> row;
        if (!prefix.empty()) row.push_back(prefix);
        row.push_back(format_double(tr.times[i]));
        for (double c : tr.states[i]) row.push_back(format_double(c));
        append_row(out, row);
    }
}

void append_verdict_fields(std::vector<std::string>& f, const Classification& c) {
    f.push_back(verdict_name(c.kind));
    f.push_back(std::to_string(c.order));
    f.push_back(c.slow_generic ? "1" : "0");
}

}  // namespace

nlohmann::ordered_json diagnostics_json(const FactorizedModel& model,
                                        const ContactDiagnostics& d, const Tolerances& tol) {
    nlohmann::ordered_json j;
    j["schema"] = "contact-kit/1";
    j["model"] = model.name;

    auto params = nlohmann::ordered_json::object();
    for (const auto& p : model.parameters) params[p.name] = p.value;
    j["parameters"] = params;

    j["point"] = d.input;
    j["projected_point"] = d.z;

    nlohmann::ordered_json verdict;
    verdict["kind"] = verdict_name(d.classification.kind);
    verdict["order"] = d.classification.order;
    verdict["slow_generic"] = d.classification.slow_generic;
    // The verdict describes the point, so the seed-handling marker is not
    // part of it; re-feeding projected_point must reproduce the record.
    auto flags = nlohmann::ordered_json::array();
    for (const std::string& fl : d.classification.flags)
        if (fl != "projected") flags.push_back(fl);
    verdict["flags"] = flags;
    j["verdict"] = verdict;

    auto eigs = nlohmann::ordered_json::array();
    for (const auto& ev : d.spectrum.eigenvalues)
        eigs.push_back(nlohmann::ordered_json::array({ev.real(), ev.imag()}));
    j["eigenvalues"] = eigs;

    j["l"] = d.l;
    j["r"] = d.r;

    auto chain = nlohmann::ordered_json::array();
    const size_t depth =
        std::min(d.chain.projected.size(), static_cast<size_t>(d.full_vector_chain_norms.size()));
    for (size_t jorder = 0; jorder < depth; ++jorder) {
        nlohmann::ordered_json entry;
        entry["order"] = jorder;
        entry["l_projected"] = d.chain.projected[jorder];
        entry["full_norm"] = d.full_vector_chain_norms[jorder];
        chain.push_back(entry);
    }
    j["chain"] = chain;

    // Coefficients are defined once the chain reached the matching depth;
    // shallower chains (e.g. off-manifold verdicts) serialize them as null.
    if (d.chain.projected.size() >= 3)
        j["fold_coefficient"] = d.fold_coefficient;
    else
        j["fold_coefficient"] = nullptr;
    if (d.chain.projected.size() >= 4)
        j["cusp_coefficient"] = d.cusp_coefficient;
    else
        j["cusp_coefficient"] = nullptr;

    nlohmann::ordered_json c0;
    c0["rows"] = matrix_rows(d.C0);
    c0["rank"] = d.C0_rank;
    j["C0"] = c0;

    nlohmann::ordered_json tj;
    tj["zero_abs"] = tol.zero_abs;
    tj["zero_rel"] = tol.zero_rel;
    tj["rank_abs"] = tol.rank.absolute;
    tj["rank_rel"] = tol.rank.relative;
    tj["manifold_dist"] = tol.manifold_dist;
    tj["max_order"] = tol.max_order;
    j["tolerances"] = tj;

    return j;
}

std::string trajectory_csv(const Trajectory& tr, const std::vector<std::string>& coords) {
    std::string out;
    append_row(out, csv_header({"t"}, coords));
    append_trajectory_rows(out, tr, "");
    return out;
}

std::string fibers_csv(const std::vector<Trajectory>& fibers,
                       const std::vector<std::string>& coords) {
    std::string out;
    append_row(out, csv_header({"fiber", "t"}, coords));
    for (size_t f = 0; f < fibers.size(); ++f)
        append_trajectory_rows(out, fibers[f], std::to_string(f));
    return out;
}

std::string branch_csv(const Branch& br, const std::vector<std::string>& coords) {
    // Regular branch points and bisected special points, merged by arclength.
    struct Row {
        double s;
        const Vec* z;
        const Classification* cls;
        double fold;
        bool has_fold;
        bool special;
    };
    std::vector<Row> rows;
    rows.reserve(br.points.size() + br.special_points.size());
    for (const auto& p : br.points)
        rows.push_back({p.arclength, &p.z, &p.classification, p.fold_coefficient, true, false});
    for (const auto& e : br.special_points)
        rows.push_back({e.arclength, &e.z, &e.classification, 0.0, false, true});
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.s < b.s; });

    std::string out;
    append_row(out, csv_header({"index", "arclength"}, coords,
                               {"verdict", "order", "slow_generic", "fold_coefficient",
                                "special"}));
    for (size_t i = 0; i < rows.size(); ++i) {
        std::vector<std::string> f;
        f.push_back(std::to_string(i));
        f.push_back(format_double(rows[i].s));
        for (double c : *rows[i].z) f.push_back(format_double(c));
        append_verdict_fields(f, *rows[i].cls);
        f.push_back(rows[i].has_fold ? format_double(rows[i].fold) : "");
        f.push_back(rows[i].special ? "1" : "0");
        append_row(out, f);
    }
    return out;
}

std::string scan_csv(const std::vector<ScanRow>& rows, const std::vector<std::string>& coords) {
    std::string out;
    append_row(out, csv_header({"index"}, coords,
                               {"verdict", "order", "slow_generic", "c0_rank",
                                "fold_coefficient", "cusp_coefficient"}));
    for (const auto& r : rows) {
        std::vector<std::string> f;
        f.push_back(std::to_string(r.index));
        for (double c : r.point) f.push_back(format_double(c));
        append_verdict_fields(f, r.verdict);
        f.push_back(std::to_string(r.verdict.C0_rank));
        f.push_back(r.has_fold_coefficient ? format_double(r.fold_coefficient) : "");
        f.push_back(r.has_cusp_coefficient ? format_double(r.cusp_coefficient) : "");
        append_row(out, f);
    }
    return out;
}

}  // namespace contactkit
