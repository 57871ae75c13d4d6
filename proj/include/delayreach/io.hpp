#pragma once

// File formats: system spec JSON (schema "delay-reach/1"), piecewise-
// constant signal CSV, Bezout-pair JSON, and deterministic report JSON.
// Delays and the grid step are decimal strings; divisibility is checked in
// exact rational arithmetic so 0.3 / 0.25 is rejected rather than snapped.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "delayreach/measure.hpp"
#include "delayreach/system.hpp"

namespace delayreach {

inline constexpr const char* kToolVersion = "delay-reach 1.0.0";
inline constexpr const char* kSpecSchema = "delay-reach/1";
inline constexpr const char* kBezoutSchema = "delay-reach-bezout/1";

using json = nlohmann::json;

// Error with a stable exit-code category for the CLI.
struct IoError : std::runtime_error {
    enum Kind { Schema = 3, Grid = 4, Shape = 5, File = 6 };
    IoError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
    Kind kind;
};

namespace detail {

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    void reduce() {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }
};

// Parse a plain decimal string ("1", "0.25", "-3.5") exactly.
inline Rational parse_decimal(const std::string& s, const std::string& field) {
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
    std::int64_t num = 0, den = 1;
    bool any = false, frac = false;
    for (; i < s.size(); ++i) {
        if (s[i] == '.') {
            if (frac) throw IoError(IoError::Schema, "field '" + field + "': malformed decimal '" + s + "'");
            frac = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            throw IoError(IoError::Schema, "field '" + field + "': malformed decimal '" + s + "'");
        if (num > (std::numeric_limits<std::int64_t>::max() - 9) / 10)
            throw IoError(IoError::Schema, "field '" + field + "': decimal out of range");
        num = num * 10 + (s[i] - '0');
        if (frac) den *= 10;
        any = true;
    }
    if (!any) throw IoError(IoError::Schema, "field '" + field + "': empty decimal");
    Rational r{neg ? -num : num, den};
    r.reduce();
    return r;
}

// a / b when the quotient is a nonnegative integer.
inline bool exact_quotient(const Rational& a, const Rational& b, std::int64_t& out) {
    // (a.num/a.den) / (b.num/b.den) = (a.num * b.den) / (a.den * b.num)
    __int128 num = static_cast<__int128>(a.num) * b.den;
    __int128 den = static_cast<__int128>(a.den) * b.num;
    if (den == 0) return false;
    if (den < 0) {
        num = -num;
        den = -den;
    }
    if (num < 0 || num % den != 0) return false;
    __int128 q = num / den;
    if (q > std::numeric_limits<std::int64_t>::max()) return false;
    out = static_cast<std::int64_t>(q);
    return true;
}

inline Eigen::MatrixXd parse_matrix(const json& j, int rows, int cols, const std::string& field) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw IoError(IoError::Shape, "field '" + field + "': expected " + std::to_string(rows) +
                                          " rows");
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw IoError(IoError::Shape, "field '" + field + "': expected " +
                                              std::to_string(cols) + " columns in row " +
                                              std::to_string(r));
        for (int c = 0; c < cols; ++c) {
            const json& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number())
                throw IoError(IoError::Schema, "field '" + field + "': non-numeric entry");
            m(r, c) = v.get<double>();
        }
    }
    return m;
}

inline json dump_matrix(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace detail

// FNV-1a 64-bit over the raw file bytes; embedded in every report.
inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoError::File, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct LoadedSpec {
    SystemSpec spec;
    std::string hash;  // of the raw spec file
};

inline LoadedSpec parse_spec_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(IoError::Schema, std::string("spec is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("schema", "") != kSpecSchema)
        throw IoError(IoError::Schema, std::string("missing or wrong 'schema' (expected ") +
                                           kSpecSchema + ")");
    for (const char* req : {"d", "m", "h", "delays", "A", "B"})
        if (!j.contains(req))
            throw IoError(IoError::Schema, std::string("missing required field '") + req + "'");

    SystemSpec spec;
    if (!j["d"].is_number_integer() || !j["m"].is_number_integer())
        throw IoError(IoError::Schema, "fields 'd' and 'm' must be integers");
    spec.d = j["d"].get<int>();
    spec.m = j["m"].get<int>();
    if (spec.d <= 0 || spec.m <= 0)
        throw IoError(IoError::Schema, "fields 'd' and 'm' must be positive");

    if (!j["h"].is_string())
        throw IoError(IoError::Schema, "field 'h' must be a decimal string");
    detail::Rational h = detail::parse_decimal(j["h"].get<std::string>(), "h");
    if (h.num <= 0) throw IoError(IoError::Schema, "field 'h' must be positive");
    spec.h = static_cast<double>(h.num) / static_cast<double>(h.den);

    if (!j["delays"].is_array() || j["delays"].empty())
        throw IoError(IoError::Schema, "field 'delays' must be a non-empty array");
    for (const auto& dj : j["delays"]) {
        if (!dj.is_string())
            throw IoError(IoError::Schema, "field 'delays': entries must be decimal strings");
        detail::Rational lam = detail::parse_decimal(dj.get<std::string>(), "delays");
        std::int64_t q = 0;
        if (lam.num <= 0 || !detail::exact_quotient(lam, h, q) || q == 0)
            throw IoError(IoError::Grid, "field 'delays': delay '" + dj.get<std::string>() +
                                             "' is not a positive multiple of grid step");
        spec.delay_idx.push_back(q);
    }

    if (!j["A"].is_array() || j["A"].size() != j["delays"].size())
        throw IoError(IoError::Shape, "field 'A': expected one matrix per delay");
    for (std::size_t k = 0; k < j["A"].size(); ++k)
        spec.A.push_back(detail::parse_matrix(j["A"][k], spec.d, spec.d,
                                              "A[" + std::to_string(k) + "]"));
    spec.B = detail::parse_matrix(j["B"], spec.d, spec.m, "B");

    if (j.contains("g") && !j["g"].empty()) {
        const json& gj = j["g"];
        if (!gj.is_array())
            throw IoError(IoError::Schema, "field 'g' must be an array of d x d matrices");
        if (static_cast<Index>(gj.size()) != spec.delay_idx.back())
            throw IoError(IoError::Shape,
                          "field 'g': sample count must equal largest delay / h (" +
                              std::to_string(spec.delay_idx.back()) + ")");
        for (std::size_t k = 0; k < gj.size(); ++k)
            spec.g.push_back(detail::parse_matrix(gj[k], spec.d, spec.d,
                                                  "g[" + std::to_string(k) + "]"));
    }

    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw IoError(IoError::Schema, e.what());
    }
    return {std::move(spec), fnv1a_hex(text)};
}

inline LoadedSpec load_spec(const std::string& path) { return parse_spec_text(read_file(path)); }

// CSV: comment lines, then "t,v1..vd", one row per grid cell start time.
inline void write_signal_csv(const std::string& path, const GridSignal& sig) {
    std::ofstream out(path);
    if (!out) throw IoError(IoError::File, "cannot write file: " + path);
    out << "# piecewise-constant cells: the row at time t holds the value on [t, t+h), h="
        << sig.grid_step() << "\n";
    out << "t";
    for (int c = 0; c < sig.dim(); ++c) out << ",v" << (c + 1);
    out << "\n";
    char buf[64];
    for (Index k = sig.start(); k < sig.end(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(k) * sig.grid_step());
        out << buf;
        for (int c = 0; c < sig.dim(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", sig.value(k, c));
            out << "," << buf;
        }
        out << "\n";
    }
}

inline GridSignal read_signal_csv(const std::string& path, double h, int expected_dim = -1) {
    std::ifstream in(path);
    if (!in) throw IoError(IoError::File, "cannot open file: " + path);
    std::string line;
    std::vector<std::pair<Index, std::vector<double>>> rows;
    int dim = -1;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("t,", 0) == 0 || line == "t") continue;  // header
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() < 2)
            throw IoError(IoError::Schema, "signal CSV: row with fewer than two columns");
        double t = vals.front();
        Index idx = static_cast<Index>(std::llround(t / h));
        if (std::abs(static_cast<double>(idx) * h - t) > 1e-9 * (1.0 + std::abs(t)))
            throw IoError(IoError::Grid, "signal CSV: time " + std::to_string(t) +
                                             " is not a multiple of the grid step");
        vals.erase(vals.begin());
        if (dim < 0) dim = static_cast<int>(vals.size());
        if (static_cast<int>(vals.size()) != dim)
            throw IoError(IoError::Shape, "signal CSV: inconsistent column count");
        rows.emplace_back(idx, std::move(vals));
    }
    if (rows.empty()) throw IoError(IoError::Schema, "signal CSV: no data rows");
    if (expected_dim > 0 && dim != expected_dim)
        throw IoError(IoError::Shape, "signal CSV: expected " + std::to_string(expected_dim) +
                                          " value columns, found " + std::to_string(dim));
    Index lo = rows.front().first, hi = rows.front().first;
    for (const auto& [idx, vals] : rows) {
        lo = std::min(lo, idx);
        hi = std::max(hi, idx);
    }
    GridSignal sig(h, dim, lo, static_cast<std::size_t>(hi - lo + 1));
    for (const auto& [idx, vals] : rows)
        for (int c = 0; c < dim; ++c) sig.at(idx, c) = vals[static_cast<std::size_t>(c)];
    return sig;
}

namespace detail {

inline json dump_measure_matrix(const MatrixMeasure& m) {
    json out;
    out["rows"] = m.rows();
    out["cols"] = m.cols();
    json atoms = json::array();
    Index lo, hi;
    if (m.support_inf_index(lo)) {
        m.support_sup_index(hi);
        for (Index k = lo; k <= hi; ++k) {
            Eigen::MatrixXd w = m.atom_at(k);
            if (w.cwiseAbs().maxCoeff() != 0.0) {
                json a;
                a["location"] = static_cast<double>(k) * m.grid_step();
                a["location_index"] = k;
                a["matrix"] = dump_matrix(w);
                atoms.push_back(a);
            }
        }
    }
    out["atoms"] = atoms;
    if (m.has_density()) {
        Index dlo = 0, dhi = 0;
        bool have = false;
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j) {
                const auto& e = m(i, j);
                if (e.density().empty()) continue;
                Index s = e.density_start();
                Index t = s + static_cast<Index>(e.density().size());
                if (!have) {
                    dlo = s;
                    dhi = t;
                    have = true;
                } else {
                    dlo = std::min(dlo, s);
                    dhi = std::max(dhi, t);
                }
            }
        json dens;
        dens["start_index"] = dlo;
        json samples = json::array();
        for (Index k = dlo; k < dhi; ++k) {
            Eigen::MatrixXd w(m.rows(), m.cols());
            for (int i = 0; i < m.rows(); ++i)
                for (int j = 0; j < m.cols(); ++j) w(i, j) = m(i, j).density_at(k);
            samples.push_back(dump_matrix(w));
        }
        dens["samples"] = samples;
        out["density"] = dens;
    }
    return out;
}

inline MatrixMeasure parse_measure_matrix(const json& j, double h, const std::string& field) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols"))
        throw IoError(IoError::Schema, "field '" + field + "': expected measure-matrix object");
    const int rows = j["rows"].get<int>();
    const int cols = j["cols"].get<int>();
    MatrixMeasure m(rows, cols, h);
    if (j.contains("atoms"))
        for (const auto& a : j["atoms"]) {
            Index idx;
            if (a.contains("location_index")) {
                idx = a["location_index"].get<Index>();
            } else {
                double t = a.at("location").get<double>();
                idx = static_cast<Index>(std::llround(t / h));
                if (std::abs(static_cast<double>(idx) * h - t) > 1e-9 * (1.0 + std::abs(t)))
                    throw IoError(IoError::Grid, "field '" + field +
                                                     "': atom location is not a grid multiple");
            }
            Eigen::MatrixXd w = parse_matrix(a.at("matrix"), rows, cols, field + ".atoms");
            m = m + MatrixMeasure::atomic(w, idx, h);
        }
    if (j.contains("density")) {
        const json& dj = j["density"];
        Index start = dj.at("start_index").get<Index>();
        const json& samples = dj.at("samples");
        for (int i = 0; i < rows; ++i)
            for (int jc = 0; jc < cols; ++jc) {
                std::vector<double> dens;
                for (const auto& s : samples)
                    dens.push_back(parse_matrix(s, rows, cols, field + ".density")(i, jc));
                MatrixMeasure dm(rows, cols, h);
                dm(i, jc) = ScalarMeasure(h, {}, start, std::move(dens));
                m = m + dm;
            }
    }
    return m;
}

}  // namespace detail

struct BezoutFile {
    MatrixMeasure R;
    MatrixMeasure S;
};

inline void write_bezout(const std::string& path, const MatrixMeasure& R, const MatrixMeasure& S,
                         double h) {
    json j;
    j["schema"] = kBezoutSchema;
    j["h"] = h;
    j["R"] = detail::dump_measure_matrix(R);
    j["S"] = detail::dump_measure_matrix(S);
    std::ofstream out(path);
    if (!out) throw IoError(IoError::File, "cannot write file: " + path);
    out << j.dump(2) << "\n";
}

inline BezoutFile read_bezout(const std::string& path, double h) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw IoError(IoError::Schema, std::string("bezout file is not valid JSON: ") + e.what());
    }
    if (j.value("schema", "") != kBezoutSchema)
        throw IoError(IoError::Schema, std::string("missing or wrong 'schema' (expected ") +
                                           kBezoutSchema + ")");
    return {detail::parse_measure_matrix(j.at("R"), h, "R"),
            detail::parse_measure_matrix(j.at("S"), h, "S")};
}

// Reports are dumped with nlohmann's lexicographically ordered keys and its
// deterministic shortest-round-trip float formatting, so identical inputs
// produce byte-identical files.
inline void write_report(const std::string& path, const json& body) {
    std::ofstream out(path);
    if (!out) throw IoError(IoError::File, "cannot write file: " + path);
    out << body.dump(2) << "\n";
}

}  // namespace delayreach
