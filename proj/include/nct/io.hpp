#pragma once

#include <charconv>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "nct/mat_tensor.hpp"
#include "nct/structure_array.hpp"

namespace nct {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Scalar strings. Coefficients travel as strings so the exact mode survives
// serialization: rationals as "p/q", doubles as shortest round-trip decimals.

inline std::string scalar_to_string(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string scalar_to_string(const Rational& v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

template <ScalarMode S>
S scalar_from_string(const std::string& text);

template <>
inline double scalar_from_string<double>(const std::string& text) {
    auto slash = text.find('/');
    if (slash != std::string::npos)
        return std::strtod(text.substr(0, slash).c_str(), nullptr) /
               std::strtod(text.substr(slash + 1).c_str(), nullptr);
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str()) throw ConfigError("cannot parse number: '" + text + "'");
    return v;
}

/// Parses "p/q", integers, and decimal/scientific literals exactly.
template <>
inline Rational scalar_from_string<Rational>(const std::string& text) {
    using boost::multiprecision::cpp_int;
    auto slash = text.find('/');
    if (slash != std::string::npos)
        return Rational(cpp_int(text.substr(0, slash)), cpp_int(text.substr(slash + 1)));

    std::string t = text;
    bool negative = false;
    std::size_t pos = 0;
    if (pos < t.size() && (t[pos] == '+' || t[pos] == '-')) negative = t[pos++] == '-';
    std::string digits;
    long frac_len = 0, exponent = 0;
    bool seen_digit = false;
    for (; pos < t.size(); ++pos) {
        char c = t[pos];
        if (c >= '0' && c <= '9') {
            digits += c;
            seen_digit = true;
        } else if (c == '.') {
            for (++pos; pos < t.size() && t[pos] >= '0' && t[pos] <= '9'; ++pos) {
                digits += t[pos];
                ++frac_len;
                seen_digit = true;
            }
            --pos;
        } else if (c == 'e' || c == 'E') {
            exponent = std::strtol(t.c_str() + pos + 1, nullptr, 10);
            break;
        } else {
            throw ConfigError("cannot parse rational: '" + text + "'");
        }
    }
    if (!seen_digit) throw ConfigError("cannot parse rational: '" + text + "'");
    cpp_int num(digits.empty() ? "0" : digits);
    if (negative) num = -num;
    long shift = exponent - frac_len;
    cpp_int den = 1;
    if (shift >= 0)
        for (long k = 0; k < shift; ++k) num *= 10;
    else
        for (long k = 0; k < -shift; ++k) den *= 10;
    return Rational(num, den);
}

// ---------------------------------------------------------------------------
// Canonical text form: terms in (degree, lexicographic) order, each rendered
// as `coeff*x<i1>.x<i2>...`, constants as the bare coefficient.

inline std::string word_to_text(const Word& w) {
    std::string s;
    for (std::size_t k = 0; k < w.letters().size(); ++k) {
        if (k) s += '.';
        s += 'x' + std::to_string(w.letters()[k]);
    }
    return s;
}

template <ScalarMode S>
std::string series_to_text(const Series<S>& a) {
    if (a.is_zero()) return "0";
    std::string out;
    for (const auto& [w, c] : a.terms()) {
        if (!out.empty()) out += " + ";
        out += scalar_to_string(c);
        if (!w.empty()) out += "*" + word_to_text(w);
    }
    return out;
}

inline Word word_from_text(const std::string& text) {
    std::vector<VarIndex> letters;
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (text[pos] != 'x') throw ConfigError("bad word literal: '" + text + "'");
        ++pos;
        std::size_t end = text.find('.', pos);
        std::string num = text.substr(pos, end == std::string::npos ? end : end - pos);
        long v = std::strtol(num.c_str(), nullptr, 10);
        if (v < 1) throw ConfigError("variable indices are 1-based: '" + text + "'");
        letters.push_back(static_cast<VarIndex>(v));
        pos = end == std::string::npos ? text.size() : end + 1;
    }
    return Word(std::move(letters));
}

template <ScalarMode S>
Series<S> series_from_text(const std::string& text) {
    Series<S> out;
    std::size_t pos = 0;
    auto trim = [](std::string s) {
        std::size_t b = s.find_first_not_of(" \t");
        std::size_t e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (pos <= text.size()) {
        std::size_t next = text.find(" + ", pos);
        std::string tok = trim(text.substr(pos, next == std::string::npos ? next : next - pos));
        pos = next == std::string::npos ? text.size() + 1 : next + 3;
        if (tok.empty() || tok == "0") continue;
        auto split = tok.find('*');
        if (split != std::string::npos) {
            out.add_term(word_from_text(trim(tok.substr(split + 1))),
                         scalar_from_string<S>(trim(tok.substr(0, split))));
        } else if (tok[0] == 'x') {
            out.add_term(word_from_text(tok), scalar_traits<S>::one());
        } else {
            out.add_term(Word{}, scalar_from_string<S>(tok));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON forms.

template <ScalarMode S>
json series_to_json(const Series<S>& a) {
    json terms = json::array();
    for (const auto& [w, c] : a.terms()) {
        json t;
        t["word"] = w.letters();
        t["coeff"] = scalar_to_string(c);
        terms.push_back(std::move(t));
    }
    return terms;
}

template <ScalarMode S>
Series<S> series_from_json(const json& j) {
    Series<S> out;
    for (const auto& t : j) {
        std::vector<VarIndex> letters;
        for (const auto& v : t.at("word")) letters.push_back(v.get<VarIndex>());
        out.add_term(Word(std::move(letters)),
                     scalar_from_string<S>(t.at("coeff").get<std::string>()));
    }
    return out;
}

template <ScalarMode S>
json tensor_to_json(const TensorElem<S>& a) {
    json terms = json::array();
    for (const auto& [k, c] : a.terms()) {
        json t;
        t["left"] = k.first.letters();
        t["right"] = k.second.letters();
        t["coeff"] = scalar_to_string(c);
        terms.push_back(std::move(t));
    }
    return terms;
}

template <ScalarMode S>
json mat_tensor_to_json(const MatTensor<S>& m) {
    json rows = json::array();
    for (const auto& [k, t] : m.entries()) {
        json e;
        e["row"] = k.first;
        e["col"] = k.second;
        e["terms"] = tensor_to_json(t);
        rows.push_back(std::move(e));
    }
    return rows;
}

/// Infinities are not valid JSON numbers; reports carry them as strings.
inline json json_number(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

// ---------------------------------------------------------------------------
// Structure-array config: {kind: "geometric"|"constant"|"explicit", q, matrix,
// n_vars}, shared by the JSON and TOML config formats.

inline StructureArray structure_array_from_json(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "geometric") return StructureArray::make_geometric(j.at("q").get<double>());
    if (kind == "constant")
        return StructureArray::make_constant(j.at("q").get<double>(),
                                             j.value("n_vars", 0));
    if (kind == "explicit") {
        std::vector<std::vector<double>> m;
        for (const auto& row : j.at("matrix")) m.push_back(row.get<std::vector<double>>());
        return StructureArray::make_explicit(std::move(m));
    }
    throw ConfigError("unknown structure-array kind: '" + kind + "'");
}

inline json structure_array_to_json(const StructureArray& Q) {
    json j;
    switch (Q.kind()) {
        case StructureArray::Kind::Geometric:
            j["kind"] = "geometric";
            j["q"] = Q.q_param();
            break;
        case StructureArray::Kind::Constant:
            j["kind"] = "constant";
            j["q"] = Q.q_param();
            if (Q.finite_size() > 0) j["n_vars"] = Q.finite_size();
            break;
        case StructureArray::Kind::Explicit: {
            j["kind"] = "explicit";
            json m = json::array();
            for (int i = 1; i <= Q.finite_size(); ++i) {
                json row = json::array();
                for (int k = 1; k <= Q.finite_size(); ++k) row.push_back(Q.q(i, k));
                m.push_back(std::move(row));
            }
            j["matrix"] = std::move(m);
            break;
        }
    }
    return j;
}

// ---------------------------------------------------------------------------
// Minimal TOML subset: `key = value` lines with strings, booleans, numbers and
// (nested) arrays, plus [section] headers flattened into nested objects. This
// covers the flat run configs; series values use the canonical text form.

namespace detail {

inline json toml_value(const std::string& raw) {
    std::string v = raw;
    auto trim = [](std::string s) {
        std::size_t b = s.find_first_not_of(" \t");
        std::size_t e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    v = trim(v);
    if (v.empty()) throw ConfigError("empty TOML value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') throw ConfigError("unterminated string: " + v);
        return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    if (v.front() == '[') {
        if (v.back() != ']') throw ConfigError("unterminated array: " + v);
        json arr = json::array();
        std::string inner = v.substr(1, v.size() - 2);
        int depth = 0;
        bool in_string = false;
        std::string cur;
        for (char c : inner) {
            if (c == '"') in_string = !in_string;
            if (!in_string) {
                if (c == '[') ++depth;
                if (c == ']') --depth;
                if (c == ',' && depth == 0) {
                    if (!trim(cur).empty()) arr.push_back(toml_value(cur));
                    cur.clear();
                    continue;
                }
            }
            cur += c;
        }
        if (!trim(cur).empty()) arr.push_back(toml_value(cur));
        return arr;
    }
    if (v.find_first_of(".eE") != std::string::npos || v.find("inf") != std::string::npos)
        return std::strtod(v.c_str(), nullptr);
    char* end = nullptr;
    long long iv = std::strtoll(v.c_str(), &end, 10);
    if (end && *end == '\0') return iv;
    return std::strtod(v.c_str(), nullptr);
}

}  // namespace detail

inline json parse_toml_lite(const std::string& text) {
    json root = json::object();
    json* section = &root;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        // Strip comments outside strings.
        bool in_string = false;
        std::string stripped;
        for (char c : line) {
            if (c == '"') in_string = !in_string;
            if (c == '#' && !in_string) break;
            stripped += c;
        }
        std::size_t b = stripped.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::size_t e = stripped.find_last_not_of(" \t\r");
        stripped = stripped.substr(b, e - b + 1);
        if (stripped.front() == '[') {
            if (stripped.back() != ']') throw ConfigError("bad TOML section: " + stripped);
            std::string name = stripped.substr(1, stripped.size() - 2);
            section = &root[name];
            if (!section->is_object()) *section = json::object();
            continue;
        }
        auto eq = stripped.find('=');
        if (eq == std::string::npos) throw ConfigError("bad TOML line: " + stripped);
        std::string key = stripped.substr(0, eq);
        key = key.substr(0, key.find_last_not_of(" \t") + 1);
        (*section)[key] = detail::toml_value(stripped.substr(eq + 1));
    }
    return root;
}

/// Loads a config as JSON from either format, picked by file extension.
inline json load_config_text(const std::string& text, const std::string& path) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml") return parse_toml_lite(text);
    return json::parse(text);
}

/// A series field may be a canonical text string or the JSON term list.
template <ScalarMode S>
Series<S> series_from_config(const json& j) {
    if (j.is_string()) return series_from_text<S>(j.get<std::string>());
    return series_from_json<S>(j);
}

}  // namespace nct
