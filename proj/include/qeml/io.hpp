#pragma once

// JSON formats for channels, graphs and reports.
//
//   matrix  : [[[re, im], ...], ...]           rows of complex entries
//   channel : {"dim": N, "degree": d, "unitaries": [matrix, ...]}
//   graph   : {"n": n, "degree": d, "edges": [[a, b], ...]}
//
// Schema errors name the JSON pointer of the offending value.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qeml/channel.hpp"
#include "qeml/errors.hpp"
#include "qeml/generators.hpp"
#include "qeml/verify.hpp"
#include "qeml/witness.hpp"

namespace qeml::io {

using Json = nlohmann::json;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path + "' failed");
}

/// Parses JSON text; syntax errors report line and column within `source`.
inline Json parse(std::string_view text, std::string_view source = "<input>") {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
}

namespace detail {

[[noreturn]] inline void schema_error(const std::string& where, const std::string& what) {
    throw ParseError((where.empty() ? std::string("/") : where) + ": " + what);
}

inline const Json& member(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object()) schema_error(where, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) schema_error(where, std::string("missing field '") + key + "'");
    return *it;
}

inline int integer(const Json& j, const std::string& where) {
    if (!j.is_number_integer()) schema_error(where, "expected an integer");
    return j.get<int>();
}

inline double number(const Json& j, const std::string& where) {
    if (!j.is_number()) schema_error(where, "expected a number");
    return j.get<double>();
}

}  // namespace detail

inline Json to_json(const ComplexMatrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

inline ComplexMatrix matrix_from_json(const Json& j, const std::string& where = "") {
    if (!j.is_array() || j.empty()) detail::schema_error(where, "expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
    ComplexMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const std::string rw = where + "/" + std::to_string(i);
        const Json& row = j[i];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            detail::schema_error(rw, "expected a row of " + std::to_string(cols) + " entries");
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
            const std::string ew = rw + "/" + std::to_string(k);
            const Json& e = row[k];
            if (!e.is_array() || e.size() != 2) detail::schema_error(ew, "expected [re, im]");
            m(i, k) = Complex(detail::number(e[0], ew + "/0"), detail::number(e[1], ew + "/1"));
        }
    }
    return m;
}

inline Json to_json(const Channel& t) {
    Json us = Json::array();
    for (const auto& u : t.unitaries()) us.push_back(to_json(u));
    return Json{{"dim", t.dim()}, {"degree", t.degree()}, {"unitaries", std::move(us)}};
}

/// Loads and revalidates a channel; a non-unitary entry is reported by index.
inline Channel channel_from_json(const Json& j) {
    const int dim = detail::integer(detail::member(j, "dim", ""), "/dim");
    const int degree = detail::integer(detail::member(j, "degree", ""), "/degree");
    const Json& us = detail::member(j, "unitaries", "");
    if (!us.is_array()) detail::schema_error("/unitaries", "expected an array");
    if (static_cast<int>(us.size()) != degree) {
        detail::schema_error("/unitaries", "degree is " + std::to_string(degree) + " but " + std::to_string(us.size()) +
                                               " unitaries are listed");
    }
    std::vector<ComplexMatrix> mats;
    mats.reserve(us.size());
    for (std::size_t k = 0; k < us.size(); ++k) {
        const std::string where = "/unitaries/" + std::to_string(k);
        ComplexMatrix m = matrix_from_json(us[k], where);
        if (m.rows() != dim || m.cols() != dim) {
            detail::schema_error(where, "expected " + std::to_string(dim) + "x" + std::to_string(dim) + ", got " +
                                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
        }
        mats.push_back(std::move(m));
    }
    return Channel(std::move(mats));
}

inline Json to_json(const RegularGraph& g) {
    Json edges = Json::array();
    for (const auto& [a, b] : g.edges()) edges.push_back({a, b});
    return Json{{"n", g.n()}, {"degree", g.degree()}, {"edges", std::move(edges)}};
}

inline RegularGraph graph_from_json(const Json& j) {
    const int n = detail::integer(detail::member(j, "n", ""), "/n");
    const Json& es = detail::member(j, "edges", "");
    if (!es.is_array()) detail::schema_error("/edges", "expected an array");
    std::vector<std::pair<int, int>> edges;
    for (std::size_t k = 0; k < es.size(); ++k) {
        const std::string where = "/edges/" + std::to_string(k);
        if (!es[k].is_array() || es[k].size() != 2) detail::schema_error(where, "expected [a, b]");
        edges.emplace_back(detail::integer(es[k][0], where + "/0"), detail::integer(es[k][1], where + "/1"));
    }
    RegularGraph g = graph_from_edges(n, edges);
    if (j.contains("degree") && detail::integer(j["degree"], "/degree") != g.degree()) {
        detail::schema_error("/degree", "does not match the edge list (degree " + std::to_string(g.degree()) + ")");
    }
    return g;
}

/// True when the document looks like a graph rather than a channel.
inline bool is_graph_document(const Json& j) {
    return j.is_object() && j.contains("edges");
}

inline Json to_json(const WitnessReport& r, bool emit_projections = false) {
    Json out{{"dim", r.dim},
             {"degree", r.degree},
             {"rho", r.rho},
             {"K", r.k},
             {"tr_p1", r.p1.rank()},
             {"tr_p2", r.p2.rank()},
             {"inner", r.inner},
             {"baseline", r.baseline},
             {"discrepancy", r.discrepancy},
             {"ratio", r.ratio},
             {"guaranteed", r.guaranteed},
             {"pass", r.pass},
             {"C_eff", r.c_eff}};
    if (emit_projections) {
        out["P1"] = to_json(r.p1.matrix());
        out["P2"] = to_json(r.p2.matrix());
    }
    return out;
}

inline Json to_json(const ClassicalWitness& r) {
    return Json{{"n", r.n},
                {"degree", r.degree},
                {"rho", r.rho},
                {"S1", r.s1},
                {"S2", r.s2},
                {"edges", r.edges},
                {"discrepancy", r.discrepancy},
                {"ratio", r.ratio},
                {"threshold", r.threshold},
                {"pass", r.pass},
                {"printed_threshold", r.printed_threshold},
                {"printed_holds", r.printed_holds}};
}

/// Array of {check, trials, worst_margin, pass, seed}; failing checks also
/// carry the replay seed and the offending instance.
inline Json to_json(const SuiteReport& r) {
    Json out = Json::array();
    for (const auto& c : r.checks) {
        Json row{{"check", c.name},
                 {"trials", c.trials},
                 {"worst_margin", c.worst_margin},
                 {"pass", c.pass},
                 {"seed", c.seed}};
        if (!c.pass) {
            row["tolerance"] = c.tolerance;
            if (c.worst_trial_seed) row["trial_seed"] = *c.worst_trial_seed;
            if (c.worst_instance) row["instance"] = to_json(*c.worst_instance);
            if (!c.detail.empty()) row["detail"] = c.detail;
        }
        out.push_back(std::move(row));
    }
    return out;
}

inline std::string dump(const Json& j) {
    return j.dump(2) + "\n";
}

}  // namespace qeml::io
