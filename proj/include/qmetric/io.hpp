#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmetric/channel.hpp"
#include "qmetric/linalg.hpp"

namespace qmetric {

using json = nlohmann::ordered_json;

// Shortest decimal that round-trips to the same double, always with an
// explicit decimal point ("2.0", not "2") so values read as reals.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".einf") == std::string::npos) s += ".0";
    return s;
}

// ---------------------------------------------------------------------------
// Matrix documents
// ---------------------------------------------------------------------------

inline json matrix_to_json(const Matrix& M, const std::string& tag = "") {
    json doc;
    doc["rows"] = M.rows();
    doc["cols"] = M.cols();
    json data = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            data.push_back({M(i, j).real(), M(i, j).imag()});
    doc["data"] = std::move(data);
    if (!tag.empty()) doc["tag"] = tag;
    return doc;
}

inline void reject_unknown_fields(const json& doc, std::initializer_list<const char*> allowed,
                                  const char* what) {
    for (const auto& [key, value] : doc.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) known = true;
        if (!known) throw ParseError(std::string(what) + ": unknown field '" + key + "'");
    }
}

inline Matrix matrix_from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("matrix document: expected an object");
    reject_unknown_fields(doc, {"rows", "cols", "data", "tag"}, "matrix document");
    if (!doc.contains("rows") || !doc.contains("cols") || !doc.contains("data"))
        throw ParseError("matrix document: rows, cols, data are required");
    if (!doc["rows"].is_number_integer() || !doc["cols"].is_number_integer())
        throw ParseError("matrix document: rows and cols must be integers");
    const auto rows = doc["rows"].get<Eigen::Index>();
    const auto cols = doc["cols"].get<Eigen::Index>();
    if (rows <= 0 || cols <= 0) throw ParseError("matrix document: non-positive dimensions");
    const auto& data = doc["data"];
    if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw ParseError("matrix document: data length must equal rows*cols");
    if (doc.contains("tag")) {
        const std::string tag = doc["tag"].get<std::string>();
        if (tag != "hermitian" && tag != "density" && tag != "kraus-op")
            throw ParseError("matrix document: unknown tag '" + tag + "'");
    }
    Matrix M(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j, ++k) {
            const auto& cell = data[static_cast<std::size_t>(k)];
            if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() || !cell[1].is_number())
                throw ParseError("matrix document: each entry must be a [re, im] pair");
            M(i, j) = Complex(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    if (!has_finite_entries(M)) throw ParseError("matrix document: non-finite entries");
    return M;
}

// ---------------------------------------------------------------------------
// Channel documents
// ---------------------------------------------------------------------------

inline json channel_to_json(const KrausChannel& T) {
    json doc;
    json ops = json::array();
    for (const auto& A : T.kraus()) ops.push_back(matrix_to_json(A, "kraus-op"));
    doc["kraus"] = std::move(ops);
    return doc;
}

// The transpose map is shipped as {"map": "transpose", "dim": n}: it has no
// Kraus form (it is not completely positive) and exists as a Choi-test control.
inline bool is_transpose_pseudo_channel(const json& doc) {
    return doc.is_object() && doc.contains("map");
}

inline int transpose_pseudo_channel_dim(const json& doc) {
    reject_unknown_fields(doc, {"map", "dim"}, "pseudo-channel document");
    if (doc["map"].get<std::string>() != "transpose")
        throw ParseError("pseudo-channel document: unknown map '" +
                         doc["map"].get<std::string>() + "'");
    if (!doc.contains("dim") || !doc["dim"].is_number_integer())
        throw ParseError("pseudo-channel document: integer dim is required");
    const int n = doc["dim"].get<int>();
    if (n < 1) throw ParseError("pseudo-channel document: dim must be positive");
    return n;
}

inline KrausChannel channel_from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("channel document: expected an object");
    reject_unknown_fields(doc, {"kraus"}, "channel document");
    if (!doc.contains("kraus") || !doc["kraus"].is_array() || doc["kraus"].empty())
        throw ParseError("channel document: non-empty kraus array is required");
    std::vector<Matrix> ops;
    for (const auto& item : doc["kraus"]) ops.push_back(matrix_from_json(item));
    return KrausChannel(std::move(ops));
}

// ---------------------------------------------------------------------------
// Files and command-line matrix shorthand
// ---------------------------------------------------------------------------

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ParseError("invalid JSON in " + path + ": " + e.what());
    }
    return doc;
}

inline void save_json_file(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write file: " + path);
    out << doc.dump(2) << '\n';
}

namespace detail {

inline std::vector<double> parse_number_list(const std::string& body, const char* what) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t comma = body.find(',', pos);
        if (comma == std::string::npos) comma = body.size();
        const std::string tok = body.substr(pos, comma - pos);
        double v = 0.0;
        const char* first = tok.data();
        const char* last = tok.data() + tok.size();
        while (first < last && *first == ' ') ++first;
        const auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc{} || res.ptr != last)
            throw ParseError(std::string(what) + ": cannot parse number '" + tok + "'");
        values.push_back(v);
        pos = comma + 1;
    }
    if (values.empty()) throw ParseError(std::string(what) + ": empty argument list");
    return values;
}

} // namespace detail

// Accepts diag(a,b,...), Eij(n,i,j) with 1-based i,j, or a path to a matrix
// document file.
inline Matrix parse_matrix_spec(const std::string& spec) {
    const auto call_body = [&spec](const char* prefix) -> std::string {
        const std::size_t plen = std::string(prefix).size();
        if (spec.rfind(prefix, 0) != 0 || spec.back() != ')')
            throw ParseError("malformed matrix shorthand: " + spec);
        return spec.substr(plen, spec.size() - plen - 1);
    };
    if (spec.rfind("diag(", 0) == 0) {
        const auto values = detail::parse_number_list(call_body("diag("), "diag");
        Matrix M = Matrix::Zero(static_cast<Eigen::Index>(values.size()),
                                static_cast<Eigen::Index>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
        return M;
    }
    if (spec.rfind("Eij(", 0) == 0) {
        const auto values = detail::parse_number_list(call_body("Eij("), "Eij");
        if (values.size() != 3) throw ParseError("Eij expects (n, i, j)");
        const int n = static_cast<int>(values[0]);
        const int i = static_cast<int>(values[1]);
        const int j = static_cast<int>(values[2]);
        if (n < 1 || i < 1 || j < 1 || i > n || j > n)
            throw ParseError("Eij indices out of range (1-based)");
        return matrix_unit(n, i - 1, j - 1);
    }
    const json doc = load_json_file(spec);
    try {
        return matrix_from_json(doc);
    } catch (const ParseError& e) {
        throw ParseError(spec + ": " + e.what());
    }
}

// FNV-1a over the canonical serialization; used for determinism receipts.
inline std::uint64_t fnv1a_hash(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace qmetric
