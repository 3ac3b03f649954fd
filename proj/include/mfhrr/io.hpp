#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfhrr/forms.hpp"
#include "mfhrr/mf.hpp"

namespace mfhrr::io {

using json = nlohmann::json;

inline json rational(const Rational& q) { return to_string(q); }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json(const std::string& text, const std::string& where) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(where + ": " + e.what());
    }
}

inline json load_json(const std::string& path) { return parse_json(read_file(path), path); }

inline const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing field '" + key + "'");
    return j.at(key);
}

inline std::string string_field(const json& j, const char* key, const std::string& where) {
    const json& v = field(j, key, where);
    if (!v.is_string()) throw InputError(where + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

inline Ring ring_from_json(const json& vars, const std::string& where) {
    if (!vars.is_array()) throw InputError(where + ": 'vars' must be an array of names");
    std::vector<std::string> names;
    for (const auto& v : vars) {
        if (!v.is_string()) throw InputError(where + ": variable names must be strings");
        names.push_back(v.get<std::string>());
    }
    return Ring(names);
}

inline json ring_to_json(const Ring& r) { return r.names(); }

inline std::vector<Poly> poly_list(const Ring& r, const json& j, const std::string& where) {
    if (!j.is_array()) throw InputError(where + ": expected an array of polynomial strings");
    std::vector<Poly> out;
    for (const auto& v : j) {
        if (!v.is_string()) throw InputError(where + ": polynomials must be strings");
        out.push_back(r.parse(v.get<std::string>()));
    }
    return out;
}

inline PolyMatrix matrix_from_json(const Ring& r, const json& j, const std::string& where) {
    if (!j.is_array()) throw InputError(where + ": matrix must be an array of rows");
    std::size_t rows = j.size(), cols = rows ? j[0].size() : 0;
    PolyMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw InputError(where + ": ragged matrix rows");
        for (std::size_t k = 0; k < cols; ++k) {
            if (!j[i][k].is_string()) throw InputError(where + ": matrix entries must be polynomial strings");
            m(i, k) = r.parse(j[i][k].get<std::string>());
        }
    }
    return m;
}

inline json matrix_to_json(const Ring& r, const PolyMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(r.format(m(i, k)));
        rows.push_back(row);
    }
    return rows;
}

// δ0 : P0 → P1 is rank1 × rank0, so an empty side needs its shape from the other.
inline PolyMatrix reshape_empty(PolyMatrix m, std::size_t rows, std::size_t cols) {
    if (m.rows() == 0 || m.cols() == 0) return PolyMatrix(rows, cols);
    return m;
}

// MF JSON: {"vars": [...], "f": "...", "delta0": [[...]], "delta1": [[...]]}.
// Inside a corpus entry, vars and f may be inherited; {"koszul": {"a": [...], "b": [...]}} is also accepted.
inline MatrixFactorization mf_from_json(const json& j, const std::string& where, const Ring* ring = nullptr,
                                        const Poly* f = nullptr) {
    if (!j.is_object()) throw InputError(where + ": factorization must be a JSON object");
    Ring r = j.contains("vars") ? ring_from_json(j.at("vars"), where) : ring ? *ring : throw InputError(where + ": missing field 'vars'");
    if (ring && j.contains("vars") && !(r == *ring))
        throw RingMismatch(where + ": factorization variables differ from the entry variables");
    if (j.contains("koszul")) {
        const json& k = j.at("koszul");
        auto a = poly_list(r, field(k, "a", where), where + ".koszul.a");
        auto b = poly_list(r, field(k, "b", where), where + ".koszul.b");
        MatrixFactorization P = koszul_mf(r, a, b);
        if (j.contains("f") && r.parse(string_field(j, "f", where)) != P.f())
            throw PotentialMismatch(where + ": Koszul data do not multiply to the stated potential");
        if (f && P.f() != *f)
            throw PotentialMismatch(where + ": Koszul potential " + r.format(P.f()) + " differs from " + r.format(*f));
        return P;
    }
    Poly pf = j.contains("f") ? r.parse(string_field(j, "f", where)) : f ? *f : throw InputError(where + ": missing field 'f'");
    if (f && pf != *f) throw PotentialMismatch(where + ": potential differs from the entry potential");
    PolyMatrix d0 = matrix_from_json(r, field(j, "delta0", where), where + ".delta0");
    PolyMatrix d1 = matrix_from_json(r, field(j, "delta1", where), where + ".delta1");
    d0 = reshape_empty(d0, d1.cols(), d1.rows());
    d1 = reshape_empty(d1, d0.cols(), d0.rows());
    return mf_new(r, pf, d0, d1);
}

inline json mf_to_json(const MatrixFactorization& P) {
    json j;
    j["vars"] = ring_to_json(P.ring());
    j["f"] = P.ring().format(P.f());
    j["delta0"] = matrix_to_json(P.ring(), P.delta0());
    j["delta1"] = matrix_to_json(P.ring(), P.delta1());
    return j;
}

// {"u^k": {"degree": [[[names...], "poly"], ...]}}, zero components omitted.
inline json form_series_to_json(const Ring& r, const FormSeries& s) {
    json out = json::object();
    for (std::size_t k = 0; k < s.truncation(); ++k) {
        if (s[k].is_zero()) continue;
        json bydeg = json::object();
        for (const auto& [mask, p] : s[k].components()) {
            json subset = json::array();
            for (std::size_t i = 0; i < r.nvars(); ++i)
                if (mask >> i & 1) subset.push_back(r.name(i));
            bydeg[std::to_string(popcount(mask))].push_back(json::array({subset, r.format(p)}));
        }
        out["u^" + std::to_string(k)] = bydeg;
    }
    return out;
}

inline json error_json(const std::exception& e) {
    json j;
    if (const auto* me = dynamic_cast<const Error*>(&e)) j["kind"] = me->kind();
    else j["kind"] = "internal";
    j["message"] = e.what();
    return j;
}

}  // namespace mfhrr::io
