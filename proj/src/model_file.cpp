#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "contactkit/expr.hpp"
#include "contactkit/model.hpp"

namespace contactkit {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool valid_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return s != "exp" && s != "ln" && s != "sqrt";
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& s, int line_no, const std::string& what) {
    try {
        size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    std::ostringstream msg;
    msg << "line " << line_no << ": malformed " << what << " '" << s << "'";
    throw ModelParseError(msg.str());
}

int parse_int(const std::string& s, int line_no, const std::string& what) {
    try {
        size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    std::ostringstream msg;
    msg << "line " << line_no << ": malformed " << what << " '" << s << "'";
    throw ModelParseError(msg.str());
}

[[noreturn]] void fail(int line_no, const std::string& what) {
    std::ostringstream msg;
    msg << "line " << line_no << ": " << what;
    throw ModelParseError(msg.str());
}

// `param <name> = <value> [min <lo> [strict]] [max <hi> [strict]]`
ParameterSpec parse_param(const std::string& name, const std::string& rhs, int line_no) {
    ParameterSpec spec;
    spec.name = name;
    const std::vector<std::string> toks = split_ws(rhs);
    if (toks.empty()) fail(line_no, "param '" + name + "' has no value");
    spec.value = parse_double(toks[0], line_no, "parameter value");
    size_t i = 1;
    std::ostringstream constraint;
    while (i < toks.size()) {
        const bool is_min = toks[i] == "min";
        const bool is_max = toks[i] == "max";
        if (!is_min && !is_max) fail(line_no, "expected 'min' or 'max', got '" + toks[i] + "'");
        if (i + 1 >= toks.size()) fail(line_no, "missing bound after '" + toks[i] + "'");
        const double bound = parse_double(toks[i + 1], line_no, "range bound");
        bool strict = false;
        i += 2;
        if (i < toks.size() && toks[i] == "strict") {
            strict = true;
            ++i;
        }
        if (is_min) {
            spec.lo = bound;
            spec.lo_strict = strict;
            if (constraint.tellp() > 0) constraint << ", ";
            constraint << name << (strict ? " > " : " >= ") << bound;
        } else {
            spec.hi = bound;
            spec.hi_strict = strict;
            if (constraint.tellp() > 0) constraint << ", ";
            constraint << name << (strict ? " < " : " <= ") << bound;
        }
    }
    spec.constraint = constraint.str();
    return spec;
}

// Indexed key of the form base[i] or base[i][j], 1-based in the file.
struct IndexedKey {
    std::string base;
    std::vector<int> idx;
};

IndexedKey parse_indexed(const std::string& key, int line_no) {
    IndexedKey out;
    size_t p = key.find('[');
    out.base = trim(key.substr(0, p));
    while (p != std::string::npos) {
        const size_t q = key.find(']', p);
        if (q == std::string::npos) fail(line_no, "unbalanced '[' in '" + key + "'");
        out.idx.push_back(parse_int(trim(key.substr(p + 1, q - p - 1)), line_no, "index"));
        p = key.find('[', q);
        if (p != std::string::npos && p != q + 1)
            fail(line_no, "unexpected text between indices in '" + key + "'");
    }
    return out;
}

std::string file_stem(const std::string& path) {
    const size_t slash = path.find_last_of("/\\");
    const std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    const size_t dot = base.find_last_of('.');
    return dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
}

}  // namespace

FactorizedModel load_model_from_file(const std::string& path,
                                     const std::map<std::string, double>& overrides) {
    std::ifstream in(path);
    if (!in) throw ModelParseError("cannot open model file '" + path + "'");

    int n = -1, k = -1;
    std::string name;
    std::vector<std::string> coords;
    std::vector<ParameterSpec> params;
    std::vector<std::pair<double, double>> domain;
    std::map<std::string, std::pair<std::string, int>> f_text, g_text;   // index key -> expr
    std::map<std::string, std::pair<std::string, int>> n_text;
    std::map<std::string, int> seen_keys;  // duplicate detection

    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const size_t hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;

        const size_t eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string rhs = trim(line.substr(eq + 1));
        if (key.empty()) fail(line_no, "empty key");
        if (rhs.empty()) fail(line_no, "empty value for '" + key + "'");

        if (key.rfind("param ", 0) == 0) {
            const std::string pname = trim(key.substr(6));
            if (!valid_identifier(pname)) fail(line_no, "invalid parameter name '" + pname + "'");
            for (const ParameterSpec& p : params)
                if (p.name == pname) fail(line_no, "duplicate parameter '" + pname + "'");
            params.push_back(parse_param(pname, rhs, line_no));
            continue;
        }
        if (seen_keys.count(key))
            fail(line_no, "duplicate key '" + key + "' (first at line " +
                              std::to_string(seen_keys[key]) + ")");
        seen_keys[key] = line_no;

        if (key == "n") {
            n = parse_int(rhs, line_no, "n");
        } else if (key == "k") {
            k = parse_int(rhs, line_no, "k");
        } else if (key == "name") {
            name = rhs;
        } else if (key == "coords") {
            coords = split_ws(rhs);
        } else if (key == "domain") {
            for (const std::string& tok : split_ws(rhs)) {
                const size_t colon = tok.find(':');
                if (colon == std::string::npos)
                    fail(line_no, "domain entries must be lo:hi, got '" + tok + "'");
                const double lo = parse_double(tok.substr(0, colon), line_no, "domain bound");
                const double hi = parse_double(tok.substr(colon + 1), line_no, "domain bound");
                if (!(lo < hi)) fail(line_no, "domain bounds must satisfy lo < hi");
                domain.emplace_back(lo, hi);
            }
        } else if (key[0] == 'f' || key[0] == 'N' || key[0] == 'G') {
            const IndexedKey ik = parse_indexed(key, line_no);
            if (ik.base == "f" && ik.idx.size() == 1)
                f_text[key] = {rhs, line_no};
            else if (ik.base == "G" && ik.idx.size() == 1)
                g_text[key] = {rhs, line_no};
            else if (ik.base == "N" && ik.idx.size() == 2)
                n_text[key] = {rhs, line_no};
            else
                fail(line_no, "unrecognized key '" + key + "' (expected f[i], N[i][j], G[i])");
        } else {
            fail(line_no, "unrecognized key '" + key + "'");
        }
    }

    if (n < 1) throw ModelParseError("'" + path + "': missing or invalid 'n' (need n >= 1)");
    if (k < 0 || k >= n)
        throw ModelParseError("'" + path + "': missing or invalid 'k' (need 0 <= k < n)");
    const int m = n - k;

    if (coords.empty())
        for (int i = 1; i <= n; ++i) coords.push_back("x" + std::to_string(i));
    if (static_cast<int>(coords.size()) != n)
        throw ModelParseError("'" + path + "': coords lists " + std::to_string(coords.size()) +
                              " names for n = " + std::to_string(n));

    // Symbol tables: coordinates occupy slots 0..n-1; `eps` is slot n and is
    // visible only to G. Parameters are substituted as constants.
    std::map<std::string, int> slots;
    for (int i = 0; i < n; ++i) {
        if (!valid_identifier(coords[i]) || coords[i] == "eps")
            throw ModelParseError("'" + path + "': invalid coordinate name '" + coords[i] + "'");
        if (slots.count(coords[i]))
            throw ModelParseError("'" + path + "': duplicate coordinate '" + coords[i] + "'");
        slots[coords[i]] = i;
    }
    for (ParameterSpec& p : params) {
        if (slots.count(p.name))
            throw ModelParseError("'" + path + "': parameter '" + p.name +
                                  "' collides with a coordinate");
        const auto ov = overrides.find(p.name);
        if (ov != overrides.end()) p.value = ov->second;
        if (!p.admits(p.value))
            throw ParameterError("parameter '" + p.name + "' = " + std::to_string(p.value) +
                                 " violates " + (p.constraint.empty() ? "its range" : p.constraint));
    }
    for (const auto& [oname, oval] : overrides) {
        (void)oval;
        bool known = false;
        for (const ParameterSpec& p : params) known = known || p.name == oname;
        if (!known)
            throw ParameterError("model '" + (name.empty() ? file_stem(path) : name) +
                                 "' has no parameter '" + oname + "'");
    }

    // Expressions see coordinates at slots 0..n-1 and parameters at trailing
    // slots, with parameter values appended to the evaluation vector. G
    // additionally sees `eps` at slot n, bound to the runtime value; an `eps`
    // parameter (which sets the model's default epsilon) is deliberately not
    // substitutable, so f and N cannot depend on it even as a constant.
    std::map<std::string, int> f_table = slots;
    std::map<std::string, int> g_table = slots;
    g_table["eps"] = n;
    std::vector<size_t> subst;  // indices into params that get expression slots
    for (size_t i = 0; i < params.size(); ++i)
        if (params[i].name != "eps") subst.push_back(i);
    for (size_t j = 0; j < subst.size(); ++j) {
        f_table[params[subst[j]].name] = n + static_cast<int>(j);
        g_table[params[subst[j]].name] = n + 1 + static_cast<int>(j);
    }

    const auto parse_with = [&](const std::string& text, int line,
                                const std::map<std::string, int>& table) {
        try {
            return parse_expression(text, table);
        } catch (const ModelParseError& e) {
            fail(line, e.what());
        }
    };

    // f components (all required).
    std::vector<Expr> f_exprs(m);
    for (int a = 1; a <= m; ++a) {
        const std::string key = "f[" + std::to_string(a) + "]";
        const auto it = f_text.find(key);
        if (it == f_text.end())
            throw ModelParseError("'" + path + "': missing " + key + " (f has " +
                                  std::to_string(m) + " components)");
        f_exprs[a - 1] = parse_with(it->second.first, it->second.second, f_table);
    }
    for (const auto& [key, val] : f_text) {
        const IndexedKey ik = parse_indexed(key, val.second);
        if (ik.idx[0] < 1 || ik.idx[0] > m)
            fail(val.second, "f index out of range (f has " + std::to_string(m) + " components)");
    }

    // N entries (missing entries are zero).
    std::vector<std::vector<Expr>> n_exprs(n, std::vector<Expr>(m));
    for (const auto& [key, val] : n_text) {
        const IndexedKey ik = parse_indexed(key, val.second);
        if (ik.idx[0] < 1 || ik.idx[0] > n || ik.idx[1] < 1 || ik.idx[1] > m)
            fail(val.second, "N index out of range (N is " + std::to_string(n) + " x " +
                                 std::to_string(m) + ")");
        n_exprs[ik.idx[0] - 1][ik.idx[1] - 1] = parse_with(val.first, val.second, f_table);
    }

    // G components (optional).
    std::vector<Expr> g_exprs(n);
    bool has_g = false;
    for (const auto& [key, val] : g_text) {
        const IndexedKey ik = parse_indexed(key, val.second);
        if (ik.idx[0] < 1 || ik.idx[0] > n)
            fail(val.second, "G index out of range (G has " + std::to_string(n) + " components)");
        g_exprs[ik.idx[0] - 1] = parse_with(val.first, val.second, g_table);
        has_g = true;
    }

    // Symbolic derivative tensors.
    std::vector<std::vector<Expr>> df(m, std::vector<Expr>(n));
    std::vector<std::vector<std::vector<Expr>>> d2f(
        m, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n)));
    std::vector<std::vector<std::vector<std::vector<Expr>>>> d3f(
        m, std::vector<std::vector<std::vector<Expr>>>(
               n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n))));
    for (int a = 0; a < m; ++a)
        for (int i = 0; i < n; ++i) {
            df[a][i] = f_exprs[a].derivative(i);
            for (int j = 0; j < n; ++j) {
                d2f[a][i][j] = df[a][i].derivative(j);
                for (int l = 0; l < n; ++l) d3f[a][i][j][l] = d2f[a][i][j].derivative(l);
            }
        }
    std::vector<std::vector<std::vector<Expr>>> dn(
        n, std::vector<std::vector<Expr>>(m, std::vector<Expr>(n)));
    std::vector<std::vector<std::vector<std::vector<Expr>>>> d2n(
        n, std::vector<std::vector<std::vector<Expr>>>(
               m, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n))));
    for (int i = 0; i < n; ++i)
        for (int b = 0; b < m; ++b)
            for (int j = 0; j < n; ++j) {
                dn[i][b][j] = n_exprs[i][b].derivative(j);
                for (int l = 0; l < n; ++l) d2n[i][b][j][l] = dn[i][b][j].derivative(l);
            }

    // The evaluation vector layout is fixed by the symbol tables above:
    // f/N slots = [z..., params...]; G slots = [z..., eps, params...].
    std::vector<double> param_values(subst.size());
    for (size_t j = 0; j < subst.size(); ++j) param_values[j] = params[subst[j]].value;

    const auto f_slots = [n, param_values](const Vec& z) {
        std::vector<double> s(z.begin(), z.end());
        s.resize(static_cast<size_t>(n) + param_values.size());
        std::copy(param_values.begin(), param_values.end(), s.begin() + n);
        return s;
    };
    const auto g_slots = [n, param_values](const Vec& z, double eps) {
        std::vector<double> s(z.begin(), z.end());
        s.resize(static_cast<size_t>(n) + 1 + param_values.size());
        s[static_cast<size_t>(n)] = eps;
        std::copy(param_values.begin(), param_values.end(), s.begin() + n + 1);
        return s;
    };

    FactorizedModel md;
    md.name = name.empty() ? file_stem(path) : name;
    md.n = n;
    md.m = m;
    md.parameters = params;
    md.coordinate_names = coords;
    md.domain_hint = domain;
    for (const ParameterSpec& p : params)
        if (p.name == "eps") md.eps = p.value;

    DerivativeProvider prov;
    prov.n = n;
    prov.m = m;
    prov.f = [f_exprs, f_slots](const Vec& z) {
        const auto s = f_slots(z);
        Vec out(f_exprs.size());
        for (size_t a = 0; a < f_exprs.size(); ++a) out[a] = f_exprs[a].eval(s);
        return out;
    };
    prov.N = [n_exprs, f_slots, n, m](const Vec& z) {
        const auto s = f_slots(z);
        Matrix out(n, m);
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < m; ++b) out(i, b) = n_exprs[i][b].eval(s);
        return out;
    };
    prov.Df = [df, f_slots, n, m](const Vec& z) {
        const auto s = f_slots(z);
        Matrix out(m, n);
        for (int a = 0; a < m; ++a)
            for (int i = 0; i < n; ++i) out(a, i) = df[a][i].eval(s);
        return out;
    };
    prov.D2f = [d2f, f_slots, n, m](const Vec& z) {
        const auto s = f_slots(z);
        MultilinearMap out(m, {n, n});
        for (int a = 0; a < m; ++a)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) out.at({a, i, j}) = d2f[a][i][j].eval(s);
        return out;
    };
    prov.D3f = [d3f, f_slots, n, m](const Vec& z) {
        const auto s = f_slots(z);
        MultilinearMap out(m, {n, n, n});
        for (int a = 0; a < m; ++a)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int l = 0; l < n; ++l)
                        out.at({a, i, j, l}) = d3f[a][i][j][l].eval(s);
        return out;
    };
    prov.DN = [dn, f_slots, n, m](const Vec& z) {
        const auto s = f_slots(z);
        MultilinearMap out(n, {m, n});
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < m; ++b)
                for (int j = 0; j < n; ++j) out.at({i, b, j}) = dn[i][b][j].eval(s);
        return out;
    };
    prov.D2N = [d2n, f_slots, n, m](const Vec& z) {
        const auto s = f_slots(z);
        MultilinearMap out(n, {m, n, n});
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < m; ++b)
                for (int j = 0; j < n; ++j)
                    for (int l = 0; l < n; ++l)
                        out.at({i, b, j, l}) = d2n[i][b][j][l].eval(s);
        return out;
    };
    md.provider = std::move(prov);

    if (has_g) {
        md.G = [g_exprs, g_slots](const Vec& z, double eps) {
            const auto s = g_slots(z, eps);
            Vec out(g_exprs.size());
            for (size_t i = 0; i < g_exprs.size(); ++i) out[i] = g_exprs[i].eval(s);
            return out;
        };
    } else {
        md.G = [](const Vec& z, double) { return Vec(z.size(), 0.0); };
    }
    return md;
}

}  // namespace contactkit
