#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "mfhrr/errors.hpp"

namespace mfhrr {

using Rational = mpq_class;

inline constexpr std::size_t kMaxVars = 16;

inline std::string to_string(const Rational& q) {
    return q.get_str();
}

// Exponent vector.  Entries beyond the ring's variable count stay zero, so
// comparisons over the full array agree with comparisons over the prefix.
struct Monomial {
    std::array<int16_t, kMaxVars> e{};

    Monomial() = default;
    Monomial(std::initializer_list<int> exps) {
        if (exps.size() > kMaxVars) throw IndexError("too many variables in monomial");
        std::size_t i = 0;
        for (int v : exps) e[i++] = static_cast<int16_t>(v);
    }

    static Monomial var(std::size_t i, int power = 1) {
        if (i >= kMaxVars) throw IndexError("variable index out of range");
        Monomial m;
        m.e[i] = static_cast<int16_t>(power);
        return m;
    }

    int degree() const {
        int d = 0;
        for (auto v : e) d += v;
        return d;
    }
    bool is_one() const {
        for (auto v : e)
            if (v != 0) return false;
        return true;
    }
    bool has_negative() const {
        for (auto v : e)
            if (v < 0) return true;
        return false;
    }

    Monomial operator*(const Monomial& o) const {
        Monomial r;
        for (std::size_t i = 0; i < kMaxVars; ++i) r.e[i] = static_cast<int16_t>(e[i] + o.e[i]);
        return r;
    }
    // Exponent-wise difference; caller ensures divisibility when needed.
    Monomial operator/(const Monomial& o) const {
        Monomial r;
        for (std::size_t i = 0; i < kMaxVars; ++i) r.e[i] = static_cast<int16_t>(e[i] - o.e[i]);
        return r;
    }
    bool divides(const Monomial& o) const {
        for (std::size_t i = 0; i < kMaxVars; ++i)
            if (e[i] > o.e[i]) return false;
        return true;
    }
    Monomial lcm(const Monomial& o) const {
        Monomial r;
        for (std::size_t i = 0; i < kMaxVars; ++i) r.e[i] = std::max(e[i], o.e[i]);
        return r;
    }
    bool coprime(const Monomial& o) const {
        for (std::size_t i = 0; i < kMaxVars; ++i)
            if (e[i] > 0 && o.e[i] > 0) return false;
        return true;
    }

    friend bool operator==(const Monomial&, const Monomial&) = default;
};

struct MonomialHash {
    std::size_t operator()(const Monomial& m) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (auto v : m.e) {
            h ^= static_cast<uint16_t>(v);
            h *= 1099511628211ull;
        }
        return h;
    }
};

enum class MonomialOrder { DegRevLex, Lex };

// Three-way comparison: positive when a > b in the given order.
inline int compare(const Monomial& a, const Monomial& b, MonomialOrder order = MonomialOrder::DegRevLex) {
    if (order == MonomialOrder::Lex) {
        for (std::size_t i = 0; i < kMaxVars; ++i)
            if (a.e[i] != b.e[i]) return a.e[i] > b.e[i] ? 1 : -1;
        return 0;
    }
    int da = a.degree(), db = b.degree();
    if (da != db) return da > db ? 1 : -1;
    for (std::size_t i = kMaxVars; i-- > 0;)
        if (a.e[i] != b.e[i]) return a.e[i] < b.e[i] ? 1 : -1;
    return 0;
}

struct DegRevLexGreater {
    bool operator()(const Monomial& a, const Monomial& b) const { return compare(a, b) > 0; }
};

struct Term {
    Monomial m;
    Rational c;
};

// Sparse polynomial; terms sorted strictly descending in degrevlex, no zero
// coefficients.  Variable names live in `Ring`.
class Poly {
public:
    Poly() = default;
    Poly(const Rational& c) {  // NOLINT(google-explicit-constructor)
        if (sgn(c) != 0) terms_.push_back({Monomial{}, c});
    }
    Poly(long c) : Poly(Rational(c)) {}  // NOLINT(google-explicit-constructor)
    Poly(int c) : Poly(Rational(c)) {}   // NOLINT(google-explicit-constructor)
    static Poly monomial(const Monomial& m, const Rational& c = 1) {
        Poly p;
        if (sgn(c) != 0) p.terms_.push_back({m, c});
        return p;
    }
    static Poly var(std::size_t i, int power = 1) { return monomial(Monomial::var(i, power)); }

    // Builds from arbitrary (possibly repeated, unordered) terms.
    static Poly from_terms(std::vector<Term> ts) {
        Poly p;
        p.terms_ = std::move(ts);
        p.normalize();
        return p;
    }

    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].m.is_one()); }
    Rational constant_term() const {
        return coefficient(Monomial{});
    }
    Rational coefficient(const Monomial& m) const {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                                   [](const Term& t, const Monomial& k) { return compare(t.m, k) > 0; });
        if (it != terms_.end() && it->m == m) return it->c;
        return 0;
    }
    const Term& lead() const { return terms_.front(); }
    int degree() const {
        int d = std::numeric_limits<int>::min();
        for (const auto& t : terms_) d = std::max(d, t.m.degree());
        return terms_.empty() ? -1 : d;
    }
    bool has_negative_exponents() const {
        for (const auto& t : terms_)
            if (t.m.has_negative()) return true;
        return false;
    }

    Poly operator-() const {
        Poly r = *this;
        for (auto& t : r.terms_) t.c = -t.c;
        return r;
    }
    friend Poly operator+(const Poly& a, const Poly& b) { return merge(a, b, 1); }
    friend Poly operator-(const Poly& a, const Poly& b) { return merge(a, b, -1); }
    Poly& operator+=(const Poly& o) { return *this = merge(*this, o, 1); }
    Poly& operator-=(const Poly& o) { return *this = merge(*this, o, -1); }

    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        if (b.terms_.size() == 1) return a.mul_term(b.terms_[0].m, b.terms_[0].c);
        if (a.terms_.size() == 1) return b.mul_term(a.terms_[0].m, a.terms_[0].c);
        std::vector<Term> out;
        out.reserve(a.terms_.size() * b.terms_.size());
        for (const auto& s : a.terms_)
            for (const auto& t : b.terms_) out.push_back({s.m * t.m, s.c * t.c});
        return from_terms(std::move(out));
    }
    Poly& operator*=(const Poly& o) { return *this = *this * o; }
    friend Poly operator*(const Rational& c, const Poly& p) { return p.scaled(c); }

    Poly scaled(const Rational& c) const {
        if (sgn(c) == 0) return {};
        Poly r = *this;
        for (auto& t : r.terms_) t.c *= c;
        return r;
    }
    // Multiplication by c·m keeps the order, since monomial orders are
    // multiplicative.
    Poly mul_term(const Monomial& m, const Rational& c) const {
        if (sgn(c) == 0) return {};
        Poly r;
        r.terms_.reserve(terms_.size());
        for (const auto& t : terms_) r.terms_.push_back({t.m * m, t.c * c});
        return r;
    }

    Poly pow(unsigned k) const {
        Poly r(1), b = *this;
        while (k) {
            if (k & 1u) r *= b;
            k >>= 1u;
            if (k) b *= b;
        }
        return r;
    }

    Poly partial(std::size_t i) const {
        if (i >= kMaxVars) throw IndexError("variable index out of range");
        std::vector<Term> out;
        for (const auto& t : terms_) {
            if (t.m.e[i] == 0) continue;
            Term d = t;
            d.c *= t.m.e[i];
            d.m.e[i] = static_cast<int16_t>(d.m.e[i] - 1);
            out.push_back(std::move(d));
        }
        return from_terms(std::move(out));
    }

    // Keeps terms satisfying pred.
    Poly filter(const std::function<bool(const Monomial&)>& pred) const {
        Poly r;
        for (const auto& t : terms_)
            if (pred(t.m)) r.terms_.push_back(t);
        return r;
    }

    friend bool operator==(const Poly& a, const Poly& b) {
        if (a.terms_.size() != b.terms_.size()) return false;
        for (std::size_t i = 0; i < a.terms_.size(); ++i)
            if (!(a.terms_[i].m == b.terms_[i].m) || a.terms_[i].c != b.terms_[i].c) return false;
        return true;
    }
    friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

    // Total order on polynomials (for use as map keys and deterministic sorts).
    friend bool operator<(const Poly& a, const Poly& b) {
        std::size_t n = std::min(a.terms_.size(), b.terms_.size());
        for (std::size_t i = 0; i < n; ++i) {
            int c = compare(a.terms_[i].m, b.terms_[i].m);
            if (c != 0) return c > 0;
            int q = cmp(a.terms_[i].c, b.terms_[i].c);
            if (q != 0) return q < 0;
        }
        return a.terms_.size() < b.terms_.size();
    }

private:
    std::vector<Term> terms_;

    void normalize() {
        std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return compare(a.m, b.m) > 0; });
        std::vector<Term> out;
        out.reserve(terms_.size());
        for (auto& t : terms_) {
            if (!out.empty() && out.back().m == t.m) {
                out.back().c += t.c;
            } else {
                if (!out.empty() && sgn(out.back().c) == 0) out.pop_back();
                out.push_back(std::move(t));
            }
        }
        if (!out.empty() && sgn(out.back().c) == 0) out.pop_back();
        terms_ = std::move(out);
    }

    static Poly merge(const Poly& a, const Poly& b, int sign) {
        Poly r;
        r.terms_.reserve(a.terms_.size() + b.terms_.size());
        std::size_t i = 0, j = 0;
        while (i < a.terms_.size() || j < b.terms_.size()) {
            int c;
            if (i == a.terms_.size()) c = -1;
            else if (j == b.terms_.size()) c = 1;
            else c = compare(a.terms_[i].m, b.terms_[j].m);
            if (c > 0) {
                r.terms_.push_back(a.terms_[i++]);
            } else if (c < 0) {
                Term t = b.terms_[j++];
                if (sign < 0) t.c = -t.c;
                r.terms_.push_back(std::move(t));
            } else {
                Rational s = sign > 0 ? Rational(a.terms_[i].c + b.terms_[j].c) : Rational(a.terms_[i].c - b.terms_[j].c);
                if (sgn(s) != 0) r.terms_.push_back({a.terms_[i].m, std::move(s)});
                ++i;
                ++j;
            }
        }
        return r;
    }
};

// Variable names plus the per-variable Laurent flag.
class Ring {
public:
    Ring() = default;
    explicit Ring(std::vector<std::string> names, std::vector<bool> laurent = {})
        : names_(std::move(names)), laurent_(std::move(laurent)) {
        if (names_.size() > kMaxVars) throw IndexError("at most 16 variables are supported");
        laurent_.resize(names_.size(), false);
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (!valid_name(names_[i])) throw SyntaxError(0, "invalid variable name '" + names_[i] + "'");
            for (std::size_t j = 0; j < i; ++j)
                if (names_[i] == names_[j]) throw SyntaxError(0, "duplicate variable '" + names_[i] + "'");
        }
    }

    std::size_t nvars() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(std::size_t i) const {
        if (i >= names_.size()) throw IndexError("variable index out of range");
        return names_[i];
    }
    bool laurent(std::size_t i) const { return i < laurent_.size() && laurent_[i]; }
    Ring with_laurent(std::size_t i) const {
        Ring r = *this;
        if (i >= r.laurent_.size()) throw IndexError("variable index out of range");
        r.laurent_[i] = true;
        return r;
    }
    Ring with_all_laurent() const {
        Ring r = *this;
        std::fill(r.laurent_.begin(), r.laurent_.end(), true);
        return r;
    }

    std::size_t index_of(std::string_view name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return i;
        throw UnknownVariable("unknown variable '" + std::string(name) + "'");
    }

    friend bool operator==(const Ring& a, const Ring& b) { return a.names_ == b.names_; }

    void check(const Poly& p) const {
        for (const auto& t : p.terms())
            for (std::size_t i = 0; i < kMaxVars; ++i) {
                if (i >= names_.size() && t.m.e[i] != 0) throw RingMismatch("exponent in undeclared variable");
                if (t.m.e[i] < 0 && !laurent(i))
                    throw RingMismatch("negative exponent in non-Laurent variable '" + names_[i] + "'");
            }
    }

    Poly var(std::string_view name) const { return Poly::var(index_of(name)); }

    Poly parse(std::string_view text) const;
    std::string format(const Poly& p) const;
    std::string format(const Monomial& m) const;

    static bool valid_name(std::string_view s) {
        if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
        for (char c : s)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
        return true;
    }

private:
    std::vector<std::string> names_;
    std::vector<bool> laurent_;
};

namespace detail {

class PolyParser {
public:
    PolyParser(std::string_view s, const Ring& ring) : s_(s), ring_(ring) {}

    Poly run() {
        skip();
        if (pos_ == s_.size()) throw SyntaxError(pos_, "empty expression");
        Poly p = expr();
        skip();
        if (pos_ != s_.size()) throw SyntaxError(pos_, std::string("unexpected '") + s_[pos_] + "'");
        return p;
    }

private:
    std::string_view s_;
    const Ring& ring_;
    std::size_t pos_ = 0;

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    // A leading sign is accepted so that printed polynomials parse back.
    Poly expr() {
        bool neg = false;
        if (peek('-') || peek('+')) {
            neg = s_[pos_] == '-';
            ++pos_;
        }
        Poly acc = term();
        if (neg) acc = -acc;
        while (peek('+') || peek('-')) {
            char op = s_[pos_++];
            Poly t = term();
            if (op == '+') acc += t;
            else acc -= t;
        }
        return acc;
    }
    Poly term() {
        Poly acc = factor();
        while (peek('*')) {
            ++pos_;
            acc *= factor();
        }
        return acc;
    }
    Poly factor() {
        skip();
        if (pos_ >= s_.size()) throw SyntaxError(pos_, "unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Poly inner = expr();
            skip();
            if (pos_ >= s_.size() || s_[pos_] != ')') throw SyntaxError(pos_, "expected ')'");
            ++pos_;
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mpz_class num(digits());
            if (peek('/')) {
                ++pos_;
                skip();
                std::size_t at = pos_;
                if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
                    throw SyntaxError(pos_, "expected denominator");
                mpz_class den(digits());
                if (den == 0) throw SyntaxError(at, "zero denominator");
                Rational q(num, den);
                q.canonicalize();
                return Poly(q);
            }
            return Poly(Rational(num));
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::size_t idx = ring_.index_of(s_.substr(start, pos_ - start));
            int power = 1;
            if (peek('^')) {
                ++pos_;
                skip();
                std::size_t at = pos_;
                if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
                    throw SyntaxError(pos_, "expected exponent");
                std::string d = digits();
                if (d.size() > 4 || std::stoi(d) > std::numeric_limits<int16_t>::max())
                    throw SyntaxError(at, "exponent too large");
                power = std::stoi(d);
            }
            return Poly::var(idx, power);
        }
        throw SyntaxError(pos_, std::string("unexpected '") + c + "'");
    }
    std::string digits() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        return std::string(s_.substr(start, pos_ - start));
    }
};

}  // namespace detail

inline Poly Ring::parse(std::string_view text) const {
    return detail::PolyParser(text, *this).run();
}

inline std::string Ring::format(const Monomial& m) const {
    std::string out;
    for (std::size_t i = 0; i < kMaxVars; ++i) {
        if (m.e[i] == 0) continue;
        if (!out.empty()) out += '*';
        out += i < names_.size() ? names_[i] : "_" + std::to_string(i);
        if (m.e[i] != 1) out += "^" + std::to_string(m.e[i]);
    }
    return out.empty() ? "1" : out;
}

inline std::string Ring::format(const Poly& p) const {
    if (p.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& t : p.terms()) {
        Rational c = t.c;
        if (first) {
            if (sgn(c) < 0) out += "-";
        } else {
            out += sgn(c) < 0 ? " - " : " + ";
        }
        c = abs(c);
        if (t.m.is_one()) {
            out += c.get_str();
        } else {
            if (c != 1) out += c.get_str() + "*";
            out += format(t.m);
        }
        first = false;
    }
    return out;
}

inline Poly parse_poly(std::string_view text, const std::vector<std::string>& vars) {
    return Ring(vars).parse(text);
}

}  // namespace mfhrr
