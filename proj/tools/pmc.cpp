// pmc: partial-matrix completion by parsimony, command-line front end.
// Talks to the library exclusively through the C interface.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "parsimony.h"

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kGradcheckTol = 1e-5;

// ---- deterministic serialization ----

// 17 significant digits: round-trip exact for doubles, and byte-stable for
// identical inputs, which the machine format promises.
std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_json(std::string& out, const ordered_json& j, int depth) {
    const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
    const std::string pad_in(2 * static_cast<std::size_t>(depth + 1), ' ');
    switch (j.type()) {
        case ordered_json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                out += ordered_json(it.key()).dump();
                out += ": ";
                write_json(out, it.value(), depth + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case ordered_json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Flat arrays of scalars stay on one line; nested ones break.
            bool scalar = true;
            for (const auto& e : j)
                if (e.is_structured()) scalar = false;
            if (scalar) {
                out += "[";
                bool first = true;
                for (const auto& e : j) {
                    if (!first) out += ", ";
                    first = false;
                    write_json(out, e, depth);
                }
                out += "]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                write_json(out, e, depth + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case ordered_json::value_t::number_float:
            out += fmt17(j.get<double>());
            return;
        default:
            out += j.dump();  // ints, bools, strings, null
            return;
    }
}

std::string render_json(const ordered_json& j) {
    std::string out;
    write_json(out, j, 0);
    out += "\n";
    return out;
}

// ---- text rendering (same numeric tokens as the machine format) ----

std::string render_matrix(const ordered_json& m, const std::string& indent) {
    std::vector<std::vector<std::string>> cells;
    std::size_t width = 0;
    for (const auto& row : m) {
        cells.emplace_back();
        for (const auto& v : row) {
            cells.back().push_back(fmt17(v.get<double>()));
            width = std::max(width, cells.back().back().size());
        }
    }
    std::string out;
    for (const auto& row : cells) {
        out += indent + "[";
        for (std::size_t c = 0; c < row.size(); ++c) {
            out += std::string(width - row[c].size() + (c ? 2 : 1), ' ');
            out += row[c];
        }
        out += " ]\n";
    }
    return out;
}

std::string render_vector(const ordered_json& v) {
    std::string out = "(";
    bool first = true;
    for (const auto& e : v) {
        if (!first) out += ", ";
        first = false;
        out += fmt17(e.get<double>());
    }
    return out + ")";
}

std::string render_solution_text(const ordered_json& s, const std::string& label) {
    std::string out = label + ":\n";
    out += "  x = " + render_vector(s["x"]) + "\n";
    out += "  objective = " + fmt17(s["objective"].get<double>()) + "\n";
    out += "  grad_norm = " + fmt17(s["grad_norm"].get<double>()) + "\n";
    out += "  gradient = " + render_vector(s["gradient"]) + "\n";
    const auto& f = s["flags"];
    out += std::string("  flags: symmetric=") + (f["symmetric"].get<bool>() ? "yes" : "no") +
           " toeplitz=" + (f["toeplitz"].get<bool>() ? "yes" : "no") +
           " positive_definite=" + (f["positive_definite"].get<bool>() ? "yes" : "no") +
           " zero_count=" + std::to_string(f["zero_count"].get<std::uint64_t>()) + "\n";
    if (s.contains("entropy"))
        out += "  entropy = " + fmt17(s["entropy"].get<double>()) + "\n";
    out += "  start_index = " + std::to_string(s["start_index"].get<std::int64_t>()) +
           ", iterations = " + std::to_string(s["iterations"].get<std::int64_t>()) + "\n";
    out += "  sigma:\n" + render_matrix(s["sigma"], "    ");
    out += "  inverse_or_pinv:\n" + render_matrix(s["inverse_or_pinv"], "    ");
    out += "  residual_map (zero threshold " +
           fmt17(s["zero_threshold"].get<double>()) + "):\n";
    for (const auto& r : s["residual_map"])
        out += "    (" + std::to_string(r["i"].get<std::int64_t>()) + "," +
               std::to_string(r["j"].get<std::int64_t>()) +
               ") -> " + fmt17(r["value"].get<double>()) + "\n";
    return out;
}

std::string render_text(const ordered_json& doc) {
    std::string out = doc["tool"].get<std::string>() + " " +
                      doc["version"].get<std::string>() + " " +
                      doc["command"].get<std::string>() + "\n";
    const auto& in = doc["input"];
    out += "input: " + std::to_string(in["rows"].get<std::int64_t>()) + "x" +
           std::to_string(in["cols"].get<std::int64_t>()) + " " +
           in["mode"].get<std::string>() + ", " +
           std::to_string(in["specified"].size()) + " specified, k=" +
           std::to_string(in["classes"].size()) + "\n";
    if (doc.contains("config")) {
        const auto& c = doc["config"];
        out += "config: grad_tol=" + fmt17(c["grad_tol"].get<double>()) +
               " dedup_tol=" + fmt17(c["dedup_tol"].get<double>()) +
               " max_iters=" + std::to_string(c["max_iters"].get<std::uint64_t>()) +
               " starts=" + std::to_string(c["starts"].get<std::uint64_t>()) +
               " start_range=" + fmt17(c["start_range"].get<double>()) +
               " seed=" + std::to_string(c["seed"].get<std::uint64_t>()) +
               " singular_guard=" + fmt17(c["singular_guard"].get<double>()) + "\n";
    }
    if (doc.contains("warnings")) {
        if (doc["warnings"].empty())
            out += "warnings: none\n";
        else
            for (const auto& w : doc["warnings"])
                out += "warning: " + w.get<std::string>() + "\n";
    }
    if (doc.contains("solutions")) {
        const auto& sols = doc["solutions"];
        out += "solutions: " + std::to_string(sols.size()) + "\n";
        std::size_t idx = 1;
        for (const auto& s : sols)
            out += render_solution_text(s, "solution " + std::to_string(idx++));
    }
    if (doc.contains("verification"))
        out += render_solution_text(doc["verification"], "verification");
    if (doc.contains("completion"))
        out += render_solution_text(doc["completion"], "completion");
    if (doc.contains("application")) {
        const auto& a = doc["application"];
        out += "application: side=" + a["side"].get<std::string>() +
               " zeros_exploited=" +
               std::to_string(a["zeros_exploited"].get<std::uint64_t>()) + "\n";
        out += "result:\n" + render_matrix(a["result"], "  ");
    }
    if (doc.contains("gradcheck")) {
        const auto& g = doc["gradcheck"];
        out += "gradcheck: samples=" + std::to_string(g["samples"].get<std::uint64_t>()) +
               " used=" + std::to_string(g["samples_used"].get<std::uint64_t>()) +
               " worst_relative_error=" + fmt17(g["worst_relative_error"].get<double>()) +
               " worst_class=" + std::to_string(g["worst_class"].get<std::int64_t>()) +
               " tolerance=" + fmt17(g["tolerance"].get<double>()) +
               (g["pass"].get<bool>() ? " PASS" : " FAIL") + "\n";
    }
    if (doc.contains("attempts"))
        out += "attempts: " + std::to_string(doc["attempts"].get<std::uint64_t>()) + "\n";
    if (doc.contains("failures")) {
        out += "failures:";
        for (auto it = doc["failures"].begin(); it != doc["failures"].end(); ++it)
            out += " " + it.key() + "=" + std::to_string(it.value().get<std::uint64_t>());
        out += "\n";
    }
    return out;
}

// ---- input parsing ----

struct CliError {
    int code;
    std::string message;
};

[[noreturn]] void die(int code, const std::string& msg) { throw CliError{code, msg}; }

double parse_number_token(const std::string& raw, const std::string& where) {
    const auto parse_part = [&](const std::string& s) {
        if (s.empty()) die(1, where + ": empty number");
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size() || errno == ERANGE)
            die(1, where + ": cannot parse number '" + s + "'");
        return v;
    };
    std::string s = raw;
    // trim
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    if (a == std::string::npos) die(1, where + ": empty number");
    s = s.substr(a, b - a + 1);
    const auto slash = s.find('/');
    if (slash == std::string::npos) return parse_part(s);
    if (s.find('/', slash + 1) != std::string::npos)
        die(1, where + ": malformed fraction '" + s + "'");
    const double num = parse_part(s.substr(0, slash));
    const double den = parse_part(s.substr(slash + 1));
    if (den == 0.0) die(1, where + ": zero denominator in '" + s + "'");
    return num / den;
}

struct SpecifiedIn {
    std::int64_t i, j;
    double value;
    std::string raw;  // nonempty when given as a string, echoed verbatim
};

struct InputDoc {
    std::int64_t rows = 0, cols = 0;
    std::vector<SpecifiedIn> specified;
    std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> classes;
    int mode = PMC_MODE_AUTO;
};

InputDoc parse_input(const std::string& path) {
    std::ifstream f(path);
    if (!f) die(1, "cannot open input file '" + path + "'");
    ordered_json j;
    try {
        j = ordered_json::parse(f);
    } catch (const std::exception& e) {
        die(1, std::string("input file '") + path + "': " + e.what());
    }
    if (!j.is_object()) die(1, "input file: top level must be an object");

    InputDoc doc;
    if (!j.contains("rows") || !j.contains("cols") || !j["rows"].is_number_integer() ||
        !j["cols"].is_number_integer())
        die(1, "input file: integer fields 'rows' and 'cols' are required");
    doc.rows = j["rows"].get<std::int64_t>();
    doc.cols = j["cols"].get<std::int64_t>();
    if (doc.rows < 1 || doc.cols < 1) die(1, "input file: dimensions must be positive");

    if (j.contains("mode")) {
        const std::string m = j["mode"].get<std::string>();
        if (m == "square")
            doc.mode = PMC_MODE_SQUARE;
        else if (m == "rectangular")
            doc.mode = PMC_MODE_RECTANGULAR;
        else
            die(1, "input file: mode must be \"square\" or \"rectangular\"");
    }

    if (j.contains("specified")) {
        if (!j["specified"].is_array()) die(1, "input file: 'specified' must be an array");
        std::size_t idx = 0;
        for (const auto& e : j["specified"]) {
            ++idx;
            const std::string where = "specified entry " + std::to_string(idx);
            if (!e.is_object() || !e.contains("i") || !e.contains("j") || !e.contains("v"))
                die(1, where + ": needs fields i, j, v");
            if (!e["i"].is_number_integer() || !e["j"].is_number_integer())
                die(1, where + ": i and j must be integers");
            SpecifiedIn s;
            s.i = e["i"].get<std::int64_t>();
            s.j = e["j"].get<std::int64_t>();
            if (e["v"].is_number()) {
                s.value = e["v"].get<double>();
            } else if (e["v"].is_string()) {
                s.raw = e["v"].get<std::string>();
                s.value = parse_number_token(
                    s.raw, where + " at (" + std::to_string(s.i) + "," +
                               std::to_string(s.j) + ")");
            } else {
                die(1, where + ": v must be a number or a fraction string");
            }
            for (const auto& prev : doc.specified)
                if (prev.i == s.i && prev.j == s.j)
                    die(1, where + ": position (" + std::to_string(s.i) + "," +
                               std::to_string(s.j) + ") specified twice");
            doc.specified.push_back(std::move(s));
        }
    }

    if (j.contains("classes")) {
        if (!j["classes"].is_array()) die(1, "input file: 'classes' must be an array");
        std::size_t cidx = 0;
        for (const auto& cls : j["classes"]) {
            ++cidx;
            const std::string where = "class " + std::to_string(cidx);
            if (!cls.is_array() || cls.empty())
                die(1, where + ": must be a nonempty array of [i,j] pairs");
            doc.classes.emplace_back();
            for (const auto& pos : cls) {
                if (!pos.is_array() || pos.size() != 2 ||
                    !pos[0].is_number_integer() || !pos[1].is_number_integer())
                    die(1, where + ": positions must be [i,j] integer pairs");
                doc.classes.back().emplace_back(pos[0].get<std::int64_t>(),
                                                pos[1].get<std::int64_t>());
            }
        }
    }
    return doc;
}

struct PatternHandle {
    pmc_pattern* p = nullptr;
    ~PatternHandle() { pmc_pattern_free(p); }
};

void build_pattern(const InputDoc& doc, PatternHandle& h) {
    h.p = pmc_pattern_new(doc.rows, doc.cols);
    if (!h.p) die(1, pmc_last_error());
    for (const auto& s : doc.specified)
        if (pmc_pattern_specify(h.p, s.i, s.j, s.value) != PMC_OK)
            die(1, pmc_last_error());
    for (const auto& cls : doc.classes) {
        std::vector<std::int64_t> flat;
        for (const auto& [i, jj] : cls) {
            flat.push_back(i);
            flat.push_back(jj);
        }
        if (pmc_pattern_tie(h.p, flat.data(), cls.size()) != PMC_OK)
            die(1, pmc_last_error());
    }
    if (pmc_pattern_finalize(h.p, doc.mode) != PMC_OK) die(1, pmc_last_error());
}

// ---- output assembly ----

ordered_json matrix_json(const std::vector<double>& data, std::size_t rows,
                         std::size_t cols) {
    ordered_json m = ordered_json::array();
    for (std::size_t i = 0; i < rows; ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t j = 0; j < cols; ++j) row.push_back(data[i * cols + j]);
        m.push_back(std::move(row));
    }
    return m;
}

ordered_json solution_json(const pmc_solution* s) {
    const std::size_t k = pmc_solution_k(s);
    const auto rows = static_cast<std::size_t>(pmc_solution_rows(s));
    const auto cols = static_cast<std::size_t>(pmc_solution_cols(s));

    ordered_json o;
    std::vector<double> x(k), grad(k);
    if (k) {
        pmc_solution_x(s, x.data());
        pmc_solution_gradient(s, grad.data());
    }
    o["x"] = x;
    o["objective"] = pmc_solution_objective(s);
    o["grad_norm"] = pmc_solution_grad_norm(s);
    o["gradient"] = grad;

    std::vector<double> buf(rows * cols);
    pmc_solution_sigma(s, buf.data());
    o["sigma"] = matrix_json(buf, rows, cols);
    pmc_solution_inv(s, buf.data());
    o["inverse_or_pinv"] = matrix_json(buf, cols, rows);

    ordered_json rm = ordered_json::array();
    for (std::size_t q = 0; q < pmc_solution_residual_count(s); ++q) {
        std::int64_t i = 0, j = 0;
        double v = 0.0;
        pmc_solution_residual(s, q, &i, &j, &v);
        rm.push_back(ordered_json{{"i", i}, {"j", j}, {"value", v}});
    }
    o["residual_map"] = rm;
    o["zero_threshold"] = pmc_solution_zero_threshold(s);

    int sym = 0, toep = 0, pd = 0;
    std::uint64_t zeros = 0;
    pmc_solution_flags(s, &sym, &toep, &pd, &zeros);
    o["flags"] = ordered_json{{"symmetric", sym != 0},
                              {"toeplitz", toep != 0},
                              {"positive_definite", pd != 0},
                              {"zero_count", zeros}};
    o["start_index"] = pmc_solution_start_index(s);
    o["iterations"] = pmc_solution_iterations(s);
    double h = 0.0;
    if (pmc_solution_entropy(s, &h) == PMC_OK) o["entropy"] = h;
    return o;
}

ordered_json input_echo(const InputDoc& doc, const pmc_pattern* p) {
    ordered_json in;
    in["rows"] = doc.rows;
    in["cols"] = doc.cols;
    in["mode"] = pmc_pattern_rectangular(p) == 1 ? "rectangular" : "square";
    ordered_json spec = ordered_json::array();
    for (const auto& s : doc.specified) {
        ordered_json e;
        e["i"] = s.i;
        e["j"] = s.j;
        if (!s.raw.empty())
            e["v"] = s.raw;  // fraction strings echoed verbatim
        else
            e["v"] = s.value;
        spec.push_back(std::move(e));
    }
    in["specified"] = spec;
    // Effective class list: explicit classes first, then the auto-completed
    // singletons, in solver order. Coordinate c of every reported x refers to
    // entry c here.
    ordered_json classes = ordered_json::array();
    std::size_t n_explicit = doc.classes.size();
    for (const auto& cls : doc.classes) {
        ordered_json c = ordered_json::array();
        for (const auto& [i, j] : cls) c.push_back(ordered_json::array({i, j}));
        classes.push_back(std::move(c));
    }
    // Reconstruct the auto singletons the same way finalize does.
    {
        std::vector<char> covered(static_cast<std::size_t>(doc.rows * doc.cols), 0);
        for (const auto& s : doc.specified)
            covered[static_cast<std::size_t>((s.i - 1) * doc.cols + (s.j - 1))] = 1;
        for (const auto& cls : doc.classes)
            for (const auto& [i, j] : cls)
                covered[static_cast<std::size_t>((i - 1) * doc.cols + (j - 1))] = 1;
        for (std::int64_t i = 1; i <= doc.rows; ++i)
            for (std::int64_t j = 1; j <= doc.cols; ++j)
                if (!covered[static_cast<std::size_t>((i - 1) * doc.cols + (j - 1))])
                    classes.push_back(
                        ordered_json::array({ordered_json::array({i, j})}));
    }
    (void)n_explicit;
    in["classes"] = classes;
    return in;
}

ordered_json config_echo(const pmc_config& cfg, double resolved_range) {
    ordered_json c;
    c["grad_tol"] = cfg.grad_tol;
    c["dedup_tol"] = cfg.dedup_tol;
    c["max_iters"] = cfg.max_iters;
    c["starts"] = cfg.starts;
    c["start_range"] = resolved_range;
    c["seed"] = cfg.seed;
    c["singular_guard"] = cfg.singular_guard;
    return c;
}

ordered_json failures_json(const pmc_solution_set* ss) {
    ordered_json f;
    for (int r = 0; r < 4; ++r)
        f[pmc_failure_name(r)] = pmc_set_failures(ss, r);
    return f;
}

std::vector<std::string> precheck_warnings(const pmc_pattern* p) {
    std::vector<std::string> out;
    uint32_t flags = 0;
    std::size_t n_slope = 0;
    std::vector<std::int64_t> slope(64);
    if (pmc_precheck(p, &flags, slope.data(), slope.size(), &n_slope) != PMC_OK)
        return out;
    if (flags & PMC_WARN_SINGLE_ROW)
        out.push_back("structural pre-check: all unknown positions lie in a single "
                      "row; the determinant is linear there and no stationary "
                      "completion exists");
    if (flags & PMC_WARN_SINGLE_COL)
        out.push_back("structural pre-check: all unknown positions lie in a single "
                      "column; the determinant is linear there and no stationary "
                      "completion exists");
    if (flags & PMC_WARN_CONSTANT_SLOPE)
        for (std::size_t q = 0; q < n_slope && q < slope.size(); ++q)
            out.push_back("structural pre-check: the determinant is affine with "
                          "constant nonzero slope in class " +
                          std::to_string(slope[q]) +
                          "; no stationary completion exists along it");
    return out;
}

double resolved_range(const pmc_config& cfg, const InputDoc& doc) {
    if (cfg.start_range > 0.0) return cfg.start_range;
    double m = 0.0;
    for (const auto& s : doc.specified) m = std::max(m, std::fabs(s.value));
    return 2.0 * (1.0 + m);
}

void emit(const ordered_json& doc, const std::string& format, const std::string& out_path) {
    const std::string rendered = format == "text" ? render_text(doc) : render_json(doc);
    if (out_path.empty()) {
        std::fwrite(rendered.data(), 1, rendered.size(), stdout);
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) die(1, "cannot open output file '" + out_path + "'");
        f.write(rendered.data(), static_cast<std::streamsize>(rendered.size()));
    }
}

ordered_json doc_header(const char* command, const InputDoc& in, const pmc_pattern* p) {
    ordered_json doc;
    doc["tool"] = "pmc";
    doc["version"] = pmc_version();
    doc["command"] = command;
    doc["input"] = input_echo(in, p);
    return doc;
}

std::vector<double> parse_x_flag(const std::string& xs, std::size_t k) {
    std::vector<double> x;
    if (!xs.empty()) {
        std::stringstream ss(xs);
        std::string tok;
        while (std::getline(ss, tok, ','))
            x.push_back(parse_number_token(tok, "--x"));
    }
    if (x.size() != k)
        die(1, "--x needs exactly " + std::to_string(k) + " comma-separated values, got " +
                   std::to_string(x.size()));
    return x;
}

// B files: bare 2D array, or an object {"entries": [[...]]}.
std::pair<std::vector<double>, std::pair<std::int64_t, std::int64_t>> parse_b_file(
    const std::string& path) {
    std::ifstream f(path);
    if (!f) die(1, "cannot open B file '" + path + "'");
    ordered_json j;
    try {
        j = ordered_json::parse(f);
    } catch (const std::exception& e) {
        die(1, std::string("B file '") + path + "': " + e.what());
    }
    const ordered_json* rows = nullptr;
    if (j.is_array())
        rows = &j;
    else if (j.is_object() && j.contains("entries") && j["entries"].is_array())
        rows = &j["entries"];
    else
        die(1, "B file: expected a 2D array or an object with an 'entries' array");
    if (rows->empty()) die(1, "B file: matrix has no rows");

    std::vector<double> data;
    std::int64_t ncols = -1;
    std::int64_t r = 0;
    for (const auto& row : *rows) {
        ++r;
        if (!row.is_array() || row.empty())
            die(1, "B file: row " + std::to_string(r) + " is not a nonempty array");
        if (ncols < 0)
            ncols = static_cast<std::int64_t>(row.size());
        else if (ncols != static_cast<std::int64_t>(row.size()))
            die(1, "B file: row " + std::to_string(r) + " has " +
                       std::to_string(row.size()) + " entries, expected " +
                       std::to_string(ncols));
        std::int64_t c = 0;
        for (const auto& v : row) {
            ++c;
            const std::string where =
                "B file entry (" + std::to_string(r) + "," + std::to_string(c) + ")";
            if (v.is_number())
                data.push_back(v.get<double>());
            else if (v.is_string())
                data.push_back(parse_number_token(v.get<std::string>(), where));
            else
                die(1, where + ": must be a number or a fraction string");
        }
    }
    return {std::move(data), {r, ncols}};
}

// ---- commands ----

int cmd_complete(const std::string& file, pmc_config cfg, const std::string& format,
                 const std::string& out_path) {
    const InputDoc in = parse_input(file);
    PatternHandle h;
    build_pattern(in, h);

    ordered_json doc = doc_header("complete", in, h.p);
    doc["config"] = config_echo(cfg, resolved_range(cfg, in));
    doc["warnings"] = precheck_warnings(h.p);

    pmc_solution_set* ss = nullptr;
    if (pmc_complete(h.p, &cfg, &ss) != PMC_OK) die(2, pmc_last_error());

    ordered_json sols = ordered_json::array();
    for (std::size_t q = 0; q < pmc_set_count(ss); ++q)
        sols.push_back(solution_json(pmc_set_solution(ss, q)));
    doc["solutions"] = sols;
    doc["attempts"] = pmc_set_attempts(ss);
    doc["failures"] = failures_json(ss);
    const bool any = pmc_set_count(ss) > 0;
    pmc_set_free(ss);

    emit(doc, format, out_path);
    return any ? 0 : 2;
}

int cmd_dempster(const std::string& file, pmc_config cfg, const std::string& format,
                 const std::string& out_path) {
    const InputDoc in = parse_input(file);
    PatternHandle h;
    build_pattern(in, h);

    pmc_solution* sol = nullptr;
    const pmc_status st = pmc_dempster(h.p, &cfg, &sol);
    if (st == PMC_ERR_PATTERN || st == PMC_ERR_INVALID_ARGUMENT ||
        st == PMC_ERR_DIMENSION)
        die(1, pmc_last_error());
    if (st != PMC_OK) die(2, pmc_last_error());

    ordered_json doc = doc_header("dempster", in, h.p);
    doc["config"] = config_echo(cfg, resolved_range(cfg, in));
    doc["warnings"] = ordered_json::array();
    doc["solutions"] = ordered_json::array({solution_json(sol)});
    pmc_solution_free(sol);

    emit(doc, format, out_path);
    return 0;
}

int cmd_verify(const std::string& file, const std::string& xs, pmc_config cfg,
               const std::string& format, const std::string& out_path) {
    const InputDoc in = parse_input(file);
    PatternHandle h;
    build_pattern(in, h);

    const std::vector<double> x =
        parse_x_flag(xs, static_cast<std::size_t>(pmc_pattern_k(h.p)));
    pmc_solution* sol = nullptr;
    if (pmc_probe(h.p, x.data(), x.size(), &sol) != PMC_OK) die(2, pmc_last_error());

    ordered_json doc = doc_header("verify", in, h.p);
    doc["config"] = config_echo(cfg, resolved_range(cfg, in));
    doc["warnings"] = precheck_warnings(h.p);
    doc["verification"] = solution_json(sol);
    pmc_solution_free(sol);

    emit(doc, format, out_path);
    return 0;
}

int cmd_gradcheck(const std::string& file, std::uint64_t samples, pmc_config cfg,
                  const std::string& format, const std::string& out_path) {
    const InputDoc in = parse_input(file);
    PatternHandle h;
    build_pattern(in, h);

    double worst = 0.0;
    std::int64_t worst_class = -1;
    std::uint64_t used = 0;
    const double range = resolved_range(cfg, in);
    if (pmc_gradcheck(h.p, samples, cfg.seed, range, &worst, &worst_class, &used) !=
        PMC_OK)
        die(1, pmc_last_error());

    const bool pass = worst < kGradcheckTol;
    ordered_json doc = doc_header("gradcheck", in, h.p);
    doc["config"] = config_echo(cfg, range);
    doc["gradcheck"] = ordered_json{{"samples", samples},
                                    {"samples_used", used},
                                    {"worst_relative_error", worst},
                                    {"worst_class", worst_class},
                                    {"tolerance", kGradcheckTol},
                                    {"pass", pass}};
    emit(doc, format, out_path);
    return pass ? 0 : 3;
}

int cmd_solve(const std::string& file, const std::string& b_file, const std::string& xs,
              const std::string& side, pmc_config cfg, const std::string& format,
              const std::string& out_path) {
    const InputDoc in = parse_input(file);
    PatternHandle h;
    build_pattern(in, h);

    const auto [b_data, b_dims] = parse_b_file(b_file);
    const auto [b_rows, b_cols] = b_dims;
    const bool right = side == "right";

    ordered_json doc = doc_header("solve", in, h.p);
    doc["config"] = config_echo(cfg, resolved_range(cfg, in));
    doc["warnings"] = precheck_warnings(h.p);

    pmc_solution* sol = nullptr;
    pmc_solution_set* ss = nullptr;
    if (!xs.empty()) {
        const std::vector<double> x =
            parse_x_flag(xs, static_cast<std::size_t>(pmc_pattern_k(h.p)));
        if (pmc_probe(h.p, x.data(), x.size(), &sol) != PMC_OK)
            die(2, pmc_last_error());
        doc["completion"] = solution_json(sol);
    } else {
        if (pmc_complete(h.p, &cfg, &ss) != PMC_OK) die(2, pmc_last_error());
        if (pmc_set_count(ss) == 0) {
            pmc_set_free(ss);
            die(2, "no completion found; nothing to apply");
        }
        doc["completion"] = solution_json(pmc_set_solution(ss, 0));
        doc["attempts"] = pmc_set_attempts(ss);
        doc["failures"] = failures_json(ss);
    }
    const pmc_solution* use = sol ? sol : pmc_set_solution(ss, 0);

    const auto n = static_cast<std::int64_t>(pmc_solution_rows(use));
    const std::int64_t out_rows = right ? b_rows : n;
    const std::int64_t out_cols = right ? n : b_cols;
    std::vector<double> result(static_cast<std::size_t>(out_rows * out_cols));
    std::uint64_t zeros = 0;
    const pmc_status st =
        pmc_apply(use, b_data.data(), b_rows, b_cols, right ? 1 : 0, result.data(), &zeros);
    if (st != PMC_OK) {
        const std::string msg = pmc_last_error();
        pmc_solution_free(sol);
        pmc_set_free(ss);
        die(st == PMC_ERR_DIMENSION || st == PMC_ERR_INVALID_ARGUMENT ? 1 : 2, msg);
    }
    pmc_solution_free(sol);
    pmc_set_free(ss);

    doc["application"] =
        ordered_json{{"side", right ? "right" : "left"},
                     {"b_rows", b_rows},
                     {"b_cols", b_cols},
                     {"result", matrix_json(result, static_cast<std::size_t>(out_rows),
                                            static_cast<std::size_t>(out_cols))},
                     {"zeros_exploited", zeros}};
    emit(doc, format, out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"partial-matrix completion by parsimony"};
    app.require_subcommand(1);

    pmc_config cfg;
    pmc_config_init(&cfg);
    std::string format = "json";
    std::string out_path;
    std::string file, b_file, xs, side = "left";
    std::uint64_t samples = 20;

    const auto add_common = [&](CLI::App* c, bool with_solver_flags) {
        c->add_option("file", file, "input document (JSON)")->required();
        c->add_option("--format", format, "json or text")
            ->check(CLI::IsMember({"json", "text"}));
        c->add_option("--out", out_path, "write output to this path instead of stdout");
        c->add_option("--tol", cfg.grad_tol, "gradient convergence tolerance");
        c->add_option("--seed", cfg.seed, "random seed");
        if (with_solver_flags) {
            c->add_option("--starts", cfg.starts, "multistart attempts");
            c->add_option("--range", cfg.start_range,
                          "start box half-width (<=0: auto 2*(1+max |value|))");
        }
    };

    auto* complete = app.add_subcommand("complete", "find stationary completions");
    add_common(complete, true);

    auto* dempster =
        app.add_subcommand("dempster", "maximum-entropy positive definite completion");
    add_common(dempster, true);

    auto* verify = app.add_subcommand("verify", "evaluate a candidate completion");
    add_common(verify, false);
    verify->add_option("--x", xs, "comma-separated unknown values (fractions allowed)");

    auto* gradcheck =
        app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
    add_common(gradcheck, false);
    gradcheck->add_option("--samples", samples, "number of random probe points");
    gradcheck->add_option("--range", cfg.start_range,
                          "probe box half-width (<=0: auto 2*(1+max |value|))");

    auto* solve = app.add_subcommand("solve", "solve a linear system through a completion");
    add_common(solve, true);
    solve->add_option("bfile", b_file, "right-hand side B (JSON 2D array)")->required();
    solve->add_option("--x", xs, "use this fixed completion instead of solving");
    solve->add_option("--side", side, "left: X = sigma^-1 B; right: X = B pinv")
        ->check(CLI::IsMember({"left", "right"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (complete->parsed()) return cmd_complete(file, cfg, format, out_path);
        if (dempster->parsed()) return cmd_dempster(file, cfg, format, out_path);
        if (verify->parsed()) return cmd_verify(file, xs, cfg, format, out_path);
        if (gradcheck->parsed()) return cmd_gradcheck(file, samples, cfg, format, out_path);
        if (solve->parsed()) return cmd_solve(file, b_file, xs, side, cfg, format, out_path);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
