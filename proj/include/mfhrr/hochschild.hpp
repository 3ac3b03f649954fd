#pragma once

#include <algorithm>
#include <functional>
#include <ostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfhrr/matrix.hpp"
#include "mfhrr/mf.hpp"
#include "mfhrr/poly.hpp"

namespace mfhrr {

// Which identity multiples are quotiented away in positions ≥ 1.
enum class Normalization {
    Scalar,  // c·id, c ∈ ℚ; chains are ℚ-linear, atoms carry monomials
    Module,  // c·id, c ∈ Q; chains are Q-linear, coefficients in front
};

inline const char* to_string(Normalization n) { return n == Normalization::Scalar ? "scalar" : "module"; }

// Basis element of End(E): x^mon·id when (row, col) = (0, 0), otherwise
// x^mon·E_{row,col}.  E_00 itself is expressed as id − Σ_{i≥1} E_ii.
struct Atom {
    uint8_t row = 0, col = 0;
    Monomial mon;

    bool is_id() const { return row == 0 && col == 0; }

    friend bool operator==(const Atom& a, const Atom& b) {
        return a.row == b.row && a.col == b.col && a.mon == b.mon;
    }
    friend bool operator<(const Atom& a, const Atom& b) {
        if (a.row != b.row) return a.row < b.row;
        if (a.col != b.col) return a.col < b.col;
        return a.mon.e < b.mon.e;
    }
};

using LinComb = std::vector<std::pair<Atom, Poly>>;

// a0[a1|…|an] together with the Čech symbols α_S in front.
struct Word {
    uint32_t cech = 0;
    std::vector<Atom> a;  // a[0] = a0

    std::size_t length() const { return a.size() - 1; }
    friend bool operator<(const Word& x, const Word& y) {
        if (x.cech != y.cech) return x.cech < y.cech;
        return x.a < y.a;
    }
    friend bool operator==(const Word& x, const Word& y) { return x.cech == y.cech && x.a == y.a; }
};

class Chain {
public:
    const std::map<Word, Poly>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    void add_raw(const Word& w, const Poly& c) {
        if (c.is_zero()) return;
        auto [it, inserted] = terms_.try_emplace(w, c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }
    Chain& operator+=(const Chain& o) {
        for (const auto& [w, c] : o.terms_) add_raw(w, c);
        return *this;
    }
    Chain& operator-=(const Chain& o) {
        for (const auto& [w, c] : o.terms_) add_raw(w, -c);
        return *this;
    }
    friend Chain operator+(Chain a, const Chain& b) { return a += b; }
    friend Chain operator-(Chain a, const Chain& b) { return a -= b; }
    Chain operator-() const {
        Chain r;
        for (const auto& [w, c] : terms_) r.terms_.emplace(w, -c);
        return r;
    }
    Chain scaled(const Poly& s) const {
        Chain r;
        if (s.is_zero()) return r;
        for (const auto& [w, c] : terms_) r.add_raw(w, s * c);
        return r;
    }
    friend bool operator==(const Chain& a, const Chain& b) { return a.terms_ == b.terms_; }
    friend bool operator!=(const Chain& a, const Chain& b) { return !(a == b); }

private:
    std::map<Word, Poly> terms_;
};

// u-truncated chain Σ_{k<U} c_k u^k.
using ChainSeries = std::vector<Chain>;

// End(E) of a ℤ/2-graded free module E = E⁰ ⊕ E¹ with differential
// [δ, −], optionally curved (δ² = W, not necessarily central).
class EndAlgebra {
public:
    EndAlgebra(std::size_t r0, std::size_t r1, PolyMatrix delta, Normalization mode, std::size_t nvars,
               std::optional<PolyMatrix> curvature = std::nullopt)
        : r0_(r0), r1_(r1), delta_(std::move(delta)), mode_(mode), nvars_(nvars), curvature_(std::move(curvature)) {
        std::size_t n = r0 + r1;
        if (n == 0 || n > 64) throw ShapeMismatch("endomorphism algebra rank out of range");
        if (delta_.rows() != n || delta_.cols() != n) throw ShapeMismatch("delta has the wrong shape");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (parity(i) == parity(j) && !delta_(i, j).is_zero())
                    throw ParityError("delta must be odd; " + entry_label("delta", i, j) + " is even");
        if (curvature_) {
            if (curvature_->rows() != n || curvature_->cols() != n) throw ShapeMismatch("curvature has the wrong shape");
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (parity(i) != parity(j) && !(*curvature_)(i, j).is_zero())
                        throw ParityError("curvature must be even");
        }
    }

    static EndAlgebra of(const MatrixFactorization& P, Normalization mode) {
        return EndAlgebra(P.rank0(), P.rank1(), P.delta(), mode, P.ring().nvars());
    }

    // Quasi-factorization: δ arbitrary odd, curvature W = δ², d² = [W, −].
    static EndAlgebra curved(std::size_t r0, std::size_t r1, const PolyMatrix& delta, Normalization mode,
                             std::size_t nvars) {
        return EndAlgebra(r0, r1, delta, mode, nvars, delta * delta);
    }

    std::size_t rank0() const { return r0_; }
    std::size_t rank1() const { return r1_; }
    std::size_t size() const { return r0_ + r1_; }
    std::size_t nvars() const { return nvars_; }
    Normalization mode() const { return mode_; }
    const PolyMatrix& delta() const { return delta_; }
    const std::optional<PolyMatrix>& curvature() const { return curvature_; }
    int parity(std::size_t i) const { return i < r0_ ? 0 : 1; }
    int parity(const Atom& a) const { return (parity(a.row) + parity(a.col)) % 2; }

    static Atom identity() { return Atom{}; }

    // Atom used for a single matrix unit; E_00 is not a basis element.
    Atom unit(std::size_t i, std::size_t j, const Monomial& m = {}) const {
        if (i >= size() || j >= size()) throw IndexError("matrix unit out of range");
        if (i == 0 && j == 0) throw IndexError("E_00 is not a basis atom; use decompose()");
        return Atom{static_cast<uint8_t>(i), static_cast<uint8_t>(j), m};
    }

    // Identity multiples are degenerate in positions ≥ 1.
    bool degenerate(const Atom& a) const {
        if (!a.is_id()) return false;
        return mode_ == Normalization::Module || a.mon.is_one();
    }

    PolyMatrix matrix(const Atom& a) const {
        PolyMatrix m(size(), size());
        Poly c = Poly::monomial(a.mon);
        if (a.is_id()) {
            for (std::size_t i = 0; i < size(); ++i) m(i, i) = c;
        } else {
            m(a.row, a.col) = c;
        }
        return m;
    }

    PolyMatrix matrix(Word const& w, std::size_t k) const { return matrix(w.a.at(k)); }

    // Adds c·x^m·E_ij to `out`, expanded in the atom basis.
    void emit_unit(LinComb& out, std::size_t i, std::size_t j, const Monomial& m, const Poly& c) const {
        if (c.is_zero()) return;
        if (mode_ == Normalization::Module) {
            Poly cm = c * Poly::monomial(m);
            if (i == 0 && j == 0) {
                out.push_back({Atom{}, cm});
                for (std::size_t k = 1; k < size(); ++k) out.push_back({Atom{uint8_t(k), uint8_t(k), {}}, -cm});
            } else {
                out.push_back({Atom{uint8_t(i), uint8_t(j), {}}, cm});
            }
            return;
        }
        for (const auto& t : c.terms()) {
            Monomial mm = m * t.m;
            Poly q(t.c);
            if (i == 0 && j == 0) {
                out.push_back({Atom{0, 0, mm}, q});
                for (std::size_t k = 1; k < size(); ++k) out.push_back({Atom{uint8_t(k), uint8_t(k), mm}, -q});
            } else {
                out.push_back({Atom{uint8_t(i), uint8_t(j), mm}, q});
            }
        }
    }

    LinComb decompose(const PolyMatrix& M) const {
        if (M.rows() != size() || M.cols() != size()) throw ShapeMismatch("matrix does not belong to this algebra");
        LinComb out;
        const Poly& c00 = M(0, 0);
        emit_scalar(out, c00);
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = 0; j < size(); ++j) {
                if (i == 0 && j == 0) continue;
                Poly c = M(i, j);
                if (i == j) c -= c00;
                emit_unit(out, i, j, Monomial{}, c);
            }
        return out;
    }

    LinComb multiply(const Atom& a, const Atom& b) const {
        LinComb out;
        Monomial m = a.mon * b.mon;
        if (a.is_id() || b.is_id()) {
            Atom r = a.is_id() ? b : a;
            r.mon = m;
            out.push_back({r, Poly(1)});
            return out;
        }
        if (a.col != b.row) return out;
        emit_unit(out, a.row, b.col, m, Poly(1));
        return out;
    }

    // d(a) = δa − (−1)^{|a|} aδ
    LinComb differential(const Atom& a) const {
        LinComb out;
        if (a.is_id()) return out;
        bool odd = parity(a) == 1;
        for (std::size_t k = 0; k < size(); ++k)
            if (!delta_(k, a.row).is_zero()) emit_unit(out, k, a.col, a.mon, delta_(k, a.row));
        for (std::size_t l = 0; l < size(); ++l)
            if (!delta_(a.col, l).is_zero())
                emit_unit(out, a.row, l, a.mon, odd ? delta_(a.col, l) : Poly(-delta_(a.col, l)));
        return out;
    }

    LinComb curvature_terms() const {
        if (!curvature_) return {};
        return decompose(*curvature_);
    }

    // Adds c·w to `out`, dropping degenerate words.
    void add(Chain& out, const Word& w, const Poly& c) const {
        if (c.is_zero()) return;
        for (std::size_t k = 1; k < w.a.size(); ++k)
            if (degenerate(w.a[k])) return;
        out.add_raw(w, c);
    }

    bool same_shape(const EndAlgebra& o) const { return r0_ == o.r0_ && r1_ == o.r1_ && mode_ == o.mode_; }

private:
    std::size_t r0_, r1_;
    PolyMatrix delta_;
    Normalization mode_;
    std::size_t nvars_;
    std::optional<PolyMatrix> curvature_;

    void emit_scalar(LinComb& out, const Poly& c) const {
        if (c.is_zero()) return;
        if (mode_ == Normalization::Module) {
            out.push_back({Atom{}, c});
            return;
        }
        for (const auto& t : c.terms()) out.push_back({Atom{0, 0, t.m}, Poly(t.c)});
    }
};

// ---------------------------------------------------------------------------
// Text form: coefficient·a0[a1|…|an], atoms `id` or `E<i>_<j>`, monomials in front.

inline std::string format_atom(const Atom& a, const Ring& ring) {
    std::string base = a.is_id() ? "id" : "E" + std::to_string(a.row) + "_" + std::to_string(a.col);
    if (a.mon.is_one()) return base;
    return ring.format(a.mon) + "*" + base;
}

inline std::string format_word(const Word& w, const Ring& ring) {
    std::string s;
    for (std::size_t i = 0; i < 32; ++i)
        if (w.cech & (FormMask{1} << i)) s += "a" + std::to_string(i + 1) + "*";
    s += format_atom(w.a[0], ring) + "[";
    for (std::size_t k = 1; k < w.a.size(); ++k) s += (k > 1 ? "|" : "") + format_atom(w.a[k], ring);
    return s + "]";
}

inline Ring default_ring(std::size_t nvars) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < nvars; ++i) names.push_back("x" + std::to_string(i + 1));
    return Ring(names);
}

inline std::string format_chain(const Chain& c, const Ring& ring) {
    if (c.is_zero()) return "0";
    std::string s;
    bool first = true;
    for (const auto& [w, k] : c.terms()) {
        if (!first) s += " + ";
        first = false;
        s += "(" + ring.format(k) + ")*" + format_word(w, ring);
    }
    return s;
}

inline std::ostream& operator<<(std::ostream& os, const Chain& c) {
    std::size_t nv = 1;
    for (const auto& [w, k] : c.terms()) {
        for (const auto& a : w.a)
            for (std::size_t i = 0; i < kMaxVars; ++i)
                if (a.mon.e[i] != 0) nv = std::max(nv, i + 1);
        for (const auto& t : k.terms())
            for (std::size_t i = 0; i < kMaxVars; ++i)
                if (t.m.e[i] != 0) nv = std::max(nv, i + 1);
    }
    return os << format_chain(c, default_ring(nv));
}

// ---------------------------------------------------------------------------
// Chain construction helpers

inline Word make_word(const std::vector<Atom>& atoms, uint32_t cech = 0) {
    if (atoms.empty()) throw ShapeMismatch("a word needs an a0 entry");
    return Word{cech, atoms};
}

inline Chain single(const EndAlgebra& A, const std::vector<Atom>& atoms, const Poly& c = Poly(1), uint32_t cech = 0) {
    Chain ch;
    A.add(ch, make_word(atoms, cech), c);
    return ch;
}

inline bool is_unit_coeff(const Poly& c) {
    return c.size() == 1 && c.terms()[0].m.is_one() && c.terms()[0].c == 1;
}

// Expands the multilinear word whose k-th entry is the linear combination *L[k].
inline void expand_into(const EndAlgebra& A, Chain& out, uint32_t cech, const std::vector<const LinComb*>& L,
                        const Poly& coeff) {
    if (coeff.is_zero()) return;
    std::size_t n = L.size();
    Word w{cech, std::vector<Atom>(n)};
    std::vector<Poly> partial(n + 1);
    std::vector<const Poly*> cur(n + 1);
    cur[0] = &coeff;
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == n) {
            A.add(out, w, *cur[n]);
            return;
        }
        for (const auto& [atom, ac] : *L[k]) {
            if (k >= 1 && A.degenerate(atom)) continue;
            w.a[k] = atom;
            if (is_unit_coeff(ac)) {
                cur[k + 1] = cur[k];
            } else {
                partial[k + 1] = *cur[k] * ac;
                if (partial[k + 1].is_zero()) continue;
                cur[k + 1] = &partial[k + 1];
            }
            rec(k + 1);
        }
    };
    rec(0);
}

inline void expand_into(const EndAlgebra& A, Chain& out, uint32_t cech, const std::vector<LinComb>& L,
                        const Poly& coeff) {
    std::vector<const LinComb*> ptrs;
    for (const auto& l : L) ptrs.push_back(&l);
    expand_into(A, out, cech, ptrs, coeff);
}

// Singleton combinations for the entries of a word.
inline std::vector<LinComb> singletons(const Word& w) {
    std::vector<LinComb> r;
    r.reserve(w.a.size());
    for (const auto& a : w.a) r.push_back({{a, Poly(1)}});
    return r;
}

// Word degree |a0| + Σ(|ai| − 1), mod 2 (Čech symbols counted separately).
inline int word_degree(const EndAlgebra& A, const Word& w) {
    int d = A.parity(w.a[0]);
    for (std::size_t k = 1; k < w.a.size(); ++k) d += A.parity(w.a[k]) + 1;
    return d % 2;
}

inline int sgn_pow(long e) { return (e % 2 == 0) ? 1 : -1; }

// ---------------------------------------------------------------------------
// Hochschild differential and Connes operator

inline Chain b2_op(const EndAlgebra& A, const Chain& x) {
    Chain out;
    for (const auto& [w, c] : x.terms()) {
        const auto& a = w.a;
        std::size_t n = w.length();
        if (n == 0) continue;
        Poly cc = popcount(w.cech) % 2 ? -c : c;
        Poly nc = -cc;
        std::vector<int> p(n + 1);
        for (std::size_t i = 0; i <= n; ++i) p[i] = A.parity(a[i]);
        auto S = singletons(w);
        std::vector<const LinComb*> L;
        // (−1)^{|a0|} a0a1[a2|…|an]
        {
            LinComb m = A.multiply(a[0], a[1]);
            L.assign({&m});
            for (std::size_t k = 2; k <= n; ++k) L.push_back(&S[k]);
            expand_into(A, out, w.cech, L, p[0] ? nc : cc);
        }
        // Σ_j (−1)^{Σ_{i≤j}|ai| − j} a0[…|aj a_{j+1}|…]
        long acc = p[0];
        for (std::size_t j = 1; j < n; ++j) {
            acc += p[j];
            LinComb m = A.multiply(a[j], a[j + 1]);
            L.clear();
            for (std::size_t k = 0; k < j; ++k) L.push_back(&S[k]);
            L.push_back(&m);
            for (std::size_t k = j + 2; k <= n; ++k) L.push_back(&S[k]);
            long e = acc - static_cast<long>(j);
            expand_into(A, out, w.cech, L, sgn_pow(e) > 0 ? cc : nc);
        }
        // −(−1)^{(|an|+1)(Σ_{i<n}|ai| − (n−1))} an a0[a1|…|a_{n−1}]
        {
            long s = 0;
            for (std::size_t i = 0; i < n; ++i) s += p[i];
            long e = (p[n] + 1) * (s - static_cast<long>(n - 1));
            LinComb m = A.multiply(a[n], a[0]);
            L.assign({&m});
            for (std::size_t k = 1; k < n; ++k) L.push_back(&S[k]);
            expand_into(A, out, w.cech, L, sgn_pow(e) > 0 ? nc : cc);
        }
    }
    return out;
}

inline Chain b1_op(const EndAlgebra& A, const Chain& x) {
    Chain out;
    for (const auto& [w, c] : x.terms()) {
        const auto& a = w.a;
        std::size_t n = w.length();
        Poly cc = popcount(w.cech) % 2 ? -c : c;
        Poly nc = -cc;
        auto S = singletons(w);
        std::vector<const LinComb*> L(n + 1);
        for (std::size_t k = 0; k <= n; ++k) L[k] = &S[k];
        long acc = 0;
        for (std::size_t j = 0; j <= n; ++j) {
            // slot j ≥ 1: (−1)^{Σ_{i<j}|ai| − j}
            long e = j == 0 ? 0 : acc - static_cast<long>(j);
            LinComb d = A.differential(a[j]);
            L[j] = &d;
            expand_into(A, out, w.cech, L, sgn_pow(e) > 0 ? cc : nc);
            L[j] = &S[j];
            acc += A.parity(a[j]);
        }
    }
    return out;
}

inline Chain b0_op(const EndAlgebra& A, const Chain& x) {
    Chain out;
    if (!A.curvature()) return out;
    LinComb W = A.curvature_terms();
    for (const auto& [w, c] : x.terms()) {
        const auto& a = w.a;
        std::size_t n = w.length();
        Poly cc = popcount(w.cech) % 2 ? -c : c;
        Poly nc = -cc;
        auto S = singletons(w);
        long acc = 0;
        // W in slot k (1 ≤ k ≤ n+1) with sign (−1)^{Σ_{i<k}|ai| − (k−1)}
        for (std::size_t k = 1; k <= n + 1; ++k) {
            acc += A.parity(a[k - 1]);
            long e = acc - static_cast<long>(k - 1);
            std::vector<const LinComb*> L;
            for (std::size_t t = 0; t < k; ++t) L.push_back(&S[t]);
            L.push_back(&W);
            for (std::size_t t = k; t <= n; ++t) L.push_back(&S[t]);
            expand_into(A, out, w.cech, L, sgn_pow(e) > 0 ? cc : nc);
        }
    }
    return out;
}

inline Chain b_op(const EndAlgebra& A, const Chain& x) {
    Chain r = b2_op(A, x);
    r += b1_op(A, x);
    if (A.curvature()) r += b0_op(A, x);
    return r;
}

// B(a0[a1|…|an]) = Σ_l ± 1[a_l|…|a_n|a_0|…|a_{l−1}]
inline Chain B_op(const EndAlgebra& A, const Chain& x) {
    Chain out;
    for (const auto& [w, c] : x.terms()) {
        const auto& a = w.a;
        std::size_t n = w.length();
        Poly cc = popcount(w.cech) % 2 ? -c : c;
        std::vector<int> p(n + 1);
        for (std::size_t i = 0; i <= n; ++i) p[i] = A.parity(a[i]);
        for (std::size_t l = 0; l <= n; ++l) {
            long tail = 0, head = 0;
            for (std::size_t i = l; i <= n; ++i) tail += p[i];
            for (std::size_t i = 0; i < l; ++i) head += p[i];
            long e = (tail - static_cast<long>(n - l + 1)) * (head - static_cast<long>(l));
            Word nw;
            nw.cech = w.cech;
            nw.a.push_back(EndAlgebra::identity());
            for (std::size_t i = l; i <= n; ++i) nw.a.push_back(a[i]);
            for (std::size_t i = 0; i < l; ++i) nw.a.push_back(a[i]);
            A.add(out, nw, sgn_pow(e) > 0 ? cc : -cc);
        }
    }
    return out;
}

inline ChainSeries zero_series(std::size_t U) { return ChainSeries(U); }

inline ChainSeries b_plus_uB(const EndAlgebra& A, const ChainSeries& x) {
    std::size_t U = x.size();
    ChainSeries r(U);
    for (std::size_t k = 0; k < U; ++k) {
        r[k] += b_op(A, x[k]);
        if (k + 1 < U) r[k + 1] += B_op(A, x[k]);
    }
    return r;
}

// Left multiplication by Σ_i α_i over the first `ncech` Čech symbols.
inline Chain cech_alpha(const Chain& x, std::size_t ncech) {
    Chain out;
    for (const auto& [w, c] : x.terms())
        for (std::size_t i = 0; i < ncech; ++i) {
            FormMask bit = FormMask{1} << i;
            if (w.cech & bit) continue;
            Word nw = w;
            nw.cech |= bit;
            out.add_raw(nw, wedge_sign(bit, w.cech) > 0 ? c : -c);
        }
    return out;
}

inline ChainSeries cech_total_differential(const EndAlgebra& A, const ChainSeries& x, std::size_t ncech) {
    ChainSeries r = b_plus_uB(A, x);
    for (std::size_t k = 0; k < x.size(); ++k) r[k] += cech_alpha(x[k], ncech);
    return r;
}

inline bool is_zero(const ChainSeries& s) {
    for (const auto& c : s)
        if (!c.is_zero()) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Shuffle products

// Entry data for one factor of a shuffle: a0 and a1..an as linear
// combinations in the target algebra, with their source parities.
struct ShuffleFactor {
    LinComb a0;
    int p0 = 0;
    std::vector<LinComb> entries;
    std::vector<int> parity;
};

// Enumerates (n, m)-shuffles as position masks; `first[t]` is true when slot
// t holds an element of the first block.  The sign is the product of
// (−1)^{|sx||sy|} over pairs with y before x.
template <class F>
inline void for_each_shuffle(const std::vector<int>& sx, const std::vector<int>& sy, F&& visit) {
    std::size_t n = sx.size(), m = sy.size();
    std::vector<int> order;  // element ids: 0..n-1 first block, n..n+m-1 second
    std::function<void(std::size_t, std::size_t, int)> rec = [&](std::size_t i, std::size_t j, int sign) {
        if (i == n && j == m) {
            visit(order, sign);
            return;
        }
        if (i < n) {
            order.push_back(static_cast<int>(i));
            rec(i + 1, j, sign);
            order.pop_back();
        }
        if (j < m) {
            // y_j jumps ahead of x_i..x_{n-1}
            int par = 0;
            for (std::size_t t = i; t < n; ++t) par += sx[t];
            int s = (par * sy[j]) % 2 ? -sign : sign;
            order.push_back(static_cast<int>(n + j));
            rec(i, j + 1, s);
            order.pop_back();
        }
    };
    rec(0, 0, 1);
}

// sh(x ⊗ y) once both factors have been mapped into the target algebra;
// a0 is the product a'0·a''0 computed by `mul0`.
inline void shuffle_terms(const EndAlgebra& T, Chain& out, const ShuffleFactor& X, const ShuffleFactor& Y,
                          const LinComb& a0, const Poly& coeff) {
    std::vector<int> sx, sy;
    for (int p : X.parity) sx.push_back((p + 1) % 2);
    for (int p : Y.parity) sy.push_back((p + 1) % 2);
    long star = 0;
    for (int s : sx) star += s;
    star *= Y.p0;
    Poly c0 = star % 2 ? -coeff : coeff;
    for_each_shuffle(sx, sy, [&](const std::vector<int>& order, int sign) {
        std::vector<const LinComb*> L{&a0};
        for (int id : order)
            L.push_back(id < static_cast<int>(sx.size()) ? &X.entries[id] : &Y.entries[id - sx.size()]);
        expand_into(T, out, 0, L, sign > 0 ? c0 : -c0);
    });
}

enum class CyclicShuffleSet {
    All,           // every pair of rotations, then every shuffle
    FirstLeading,  // only terms in which a'_0 precedes a''_0
};

inline void cyclic_shuffle_terms(const EndAlgebra& T, Chain& out, const ShuffleFactor& X, const ShuffleFactor& Y,
                                 const Poly& coeff, CyclicShuffleSet set) {
    // blocks: (a'_0, …, a'_n) and (a''_0, …, a''_m)
    std::vector<LinComb> xs{X.a0}, ys{Y.a0};
    std::vector<int> px{X.p0}, py{Y.p0};
    for (std::size_t k = 0; k < X.entries.size(); ++k) xs.push_back(X.entries[k]), px.push_back(X.parity[k]);
    for (std::size_t k = 0; k < Y.entries.size(); ++k) ys.push_back(Y.entries[k]), py.push_back(Y.parity[k]);
    long sstar = X.p0;
    for (int p : X.parity) sstar += p + 1;
    Poly c0 = sstar % 2 ? -coeff : coeff;
    LinComb one{{EndAlgebra::identity(), Poly(1)}};

    auto rotate = [](const std::vector<int>& s, std::size_t r, std::vector<std::size_t>& idx) {
        // rotation bringing element r to the front; sign of moving the tail
        // block past the head block in shifted degrees
        std::size_t n = s.size();
        idx.clear();
        long head = 0, tail = 0;
        for (std::size_t i = 0; i < r; ++i) head += s[i];
        for (std::size_t i = r; i < n; ++i) tail += s[i];
        for (std::size_t i = r; i < n; ++i) idx.push_back(i);
        for (std::size_t i = 0; i < r; ++i) idx.push_back(i);
        return (head * tail) % 2 ? -1 : 1;
    };
    std::vector<int> sxs, sys;
    for (int p : px) sxs.push_back((p + 1) % 2);
    for (int p : py) sys.push_back((p + 1) % 2);
    std::vector<std::size_t> ix, iy;
    for (std::size_t rx = 0; rx < xs.size(); ++rx) {
        int s1 = rotate(sxs, rx, ix);
        std::vector<int> rsx;
        for (auto i : ix) rsx.push_back(sxs[i]);
        for (std::size_t ry = 0; ry < ys.size(); ++ry) {
            int s2 = rotate(sys, ry, iy);
            std::vector<int> rsy;
            for (auto i : iy) rsy.push_back(sys[i]);
            for_each_shuffle(rsx, rsy, [&](const std::vector<int>& order, int sign) {
                if (set == CyclicShuffleSet::FirstLeading) {
                    int posx0 = -1, posy0 = -1;
                    for (std::size_t t = 0; t < order.size(); ++t) {
                        int id = order[t];
                        if (id < static_cast<int>(ix.size())) {
                            if (ix[id] == 0) posx0 = static_cast<int>(t);
                        } else if (iy[id - ix.size()] == 0) {
                            posy0 = static_cast<int>(t);
                        }
                    }
                    if (posx0 > posy0) return;
                }
                std::vector<const LinComb*> L{&one};
                for (int id : order) {
                    if (id < static_cast<int>(ix.size())) L.push_back(&xs[ix[id]]);
                    else L.push_back(&ys[iy[id - ix.size()]]);
                }
                int total = sign * s1 * s2;
                expand_into(T, out, 0, L, total > 0 ? c0 : -c0);
            });
        }
    }
}

// Shuffle products inside a single algebra, a'_0 ⊗ a''_0 ↦ a'_0 a''_0.
inline ShuffleFactor internal_factor(const EndAlgebra& A, const Word& w) {
    ShuffleFactor F;
    F.a0 = {{w.a[0], Poly(1)}};
    F.p0 = A.parity(w.a[0]);
    for (std::size_t k = 1; k < w.a.size(); ++k) {
        F.entries.push_back({{w.a[k], Poly(1)}});
        F.parity.push_back(A.parity(w.a[k]));
    }
    return F;
}

inline void require_plain(const Word& w) {
    if (w.cech != 0) throw ShapeMismatch("shuffle products of Čech-augmented chains are not supported");
}

inline Chain sh_internal(const EndAlgebra& A, const Chain& x, const Chain& y) {
    Chain out;
    for (const auto& [wx, cx] : x.terms())
        for (const auto& [wy, cy] : y.terms()) {
            require_plain(wx);
            require_plain(wy);
            auto X = internal_factor(A, wx), Y = internal_factor(A, wy);
            shuffle_terms(A, out, X, Y, A.multiply(wx.a[0], wy.a[0]), cx * cy);
        }
    return out;
}

inline Chain Sh_internal(const EndAlgebra& A, const Chain& x, const Chain& y,
                         CyclicShuffleSet set = CyclicShuffleSet::FirstLeading) {
    Chain out;
    for (const auto& [wx, cx] : x.terms())
        for (const auto& [wy, cy] : y.terms()) {
            require_plain(wx);
            require_plain(wy);
            cyclic_shuffle_terms(A, out, internal_factor(A, wx), internal_factor(A, wy), cx * cy, set);
        }
    return out;
}

// End(P) ⊗ End(R) → End(P ⊗ R) for factorizations over a common ring.
class TensorAlgebra {
public:
    TensorAlgebra(const MatrixFactorization& P, const MatrixFactorization& R, Normalization mode)
        : left_(EndAlgebra::of(P, mode)),
          right_(EndAlgebra::of(R, mode)),
          index_(tensor_index(P, R)),
          product_(EndAlgebra::of(tensor_mf(P, R), mode)) {}

    const EndAlgebra& left() const { return left_; }
    const EndAlgebra& right() const { return right_; }
    const EndAlgebra& product() const { return product_; }

    LinComb embed_left(const Atom& a) const {
        std::lock_guard<std::mutex> lock(*mutex_);
        auto it = left_cache_.find(a);
        if (it != left_cache_.end()) return it->second;
        LinComb r = product_.decompose(index_.left(left_.matrix(a)));
        left_cache_.emplace(a, r);
        return r;
    }
    LinComb embed_right(const Atom& b) const {
        std::lock_guard<std::mutex> lock(*mutex_);
        auto it = right_cache_.find(b);
        if (it != right_cache_.end()) return it->second;
        LinComb r = product_.decompose(index_.right(right_.matrix(b), right_.parity(b)));
        right_cache_.emplace(b, r);
        return r;
    }

    ShuffleFactor factor_left(const Word& w) const {
        ShuffleFactor F;
        F.a0 = embed_left(w.a[0]);
        F.p0 = left_.parity(w.a[0]);
        for (std::size_t k = 1; k < w.a.size(); ++k) {
            F.entries.push_back(embed_left(w.a[k]));
            F.parity.push_back(left_.parity(w.a[k]));
        }
        return F;
    }
    ShuffleFactor factor_right(const Word& w) const {
        ShuffleFactor F;
        F.a0 = embed_right(w.a[0]);
        F.p0 = right_.parity(w.a[0]);
        for (std::size_t k = 1; k < w.a.size(); ++k) {
            F.entries.push_back(embed_right(w.a[k]));
            F.parity.push_back(right_.parity(w.a[k]));
        }
        return F;
    }

    // (a'_0 ⊗ 1)(1 ⊗ a''_0) = a'_0 ⊗ a''_0
    LinComb product_a0(const Word& x, const Word& y) const {
        PolyMatrix m = index_.left(left_.matrix(x.a[0])) * index_.right(right_.matrix(y.a[0]), right_.parity(y.a[0]));
        return product_.decompose(m);
    }

    Chain sh(const Chain& x, const Chain& y) const {
        Chain out;
        for (const auto& [wx, cx] : x.terms())
            for (const auto& [wy, cy] : y.terms()) {
                require_plain(wx);
                require_plain(wy);
                shuffle_terms(product_, out, factor_left(wx), factor_right(wy), product_a0(wx, wy), cx * cy);
            }
        return out;
    }
    Chain Sh(const Chain& x, const Chain& y, CyclicShuffleSet set = CyclicShuffleSet::FirstLeading) const {
        Chain out;
        for (const auto& [wx, cx] : x.terms())
            for (const auto& [wy, cy] : y.terms()) {
                require_plain(wx);
                require_plain(wy);
                cyclic_shuffle_terms(product_, out, factor_left(wx), factor_right(wy), cx * cy, set);
            }
        return out;
    }

private:
    EndAlgebra left_, right_;
    TensorIndex index_;
    EndAlgebra product_;
    mutable std::map<Atom, LinComb> left_cache_, right_cache_;
    std::shared_ptr<std::mutex> mutex_ = std::make_shared<std::mutex>();
};

// ---------------------------------------------------------------------------
// Ψ : Hoch(End P) → Hoch(End D(P))

// Entrywise dual composed with the grading identification diag(1, −1), so
// that δ_{D(P)} = δ* and d(a*) = (da)*: (a*)_{ij} = (−1)^{|a| p_i} a_{ji}.
// On atoms x^m E_kl ↦ (−1)^{|a| p_l} x^m E_lk.
inline std::pair<Atom, int> dual_atom(const EndAlgebra& A, const Atom& a) {
    if (a.is_id()) return {a, 1};
    int s = (A.parity(a) * A.parity(a.col)) % 2 ? -1 : 1;
    return {Atom{a.col, a.row, a.mon}, s};
}

inline Chain psi_op(const EndAlgebra& A, const EndAlgebra& D, const Chain& x) {
    if (!A.same_shape(D)) throw ShapeMismatch("Ψ target must have the same block ranks");
    Chain out;
    for (const auto& [w, c] : x.terms()) {
        std::size_t n = w.length();
        long e = static_cast<long>(n);
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = i + 1; j <= n; ++j) e += (A.parity(w.a[i]) + 1) * (A.parity(w.a[j]) + 1);
        int sign = sgn_pow(e);
        Word nw;
        nw.cech = w.cech;
        auto [d0, s0] = dual_atom(A, w.a[0]);
        sign *= s0;
        nw.a.push_back(d0);
        for (std::size_t i = n; i >= 1; --i) {
            auto [di, si] = dual_atom(A, w.a[i]);
            sign *= si;
            nw.a.push_back(di);
        }
        D.add(out, nw, sign > 0 ? c : -c);
    }
    return out;
}

// On u-series Ψ acts by u ↦ −u, which makes it commute with b + uB
// (Ψb = bΨ and ΨB = −BΨ on chains).
inline ChainSeries psi_series(const EndAlgebra& A, const EndAlgebra& D, const ChainSeries& x) {
    ChainSeries r(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) r[k] = k % 2 ? -psi_op(A, D, x[k]) : psi_op(A, D, x[k]);
    return r;
}

// Bidual identification: Ψ∘Ψ multiplies a word by (−1)^{Σ|a_i|}.
inline Chain grading_twist(const EndAlgebra& A, const Chain& x) {
    Chain r;
    for (const auto& [w, c] : x.terms()) {
        int s = 0;
        for (const auto& a : w.a) s += A.parity(a);
        r.add_raw(w, s % 2 ? -c : c);
    }
    return r;
}

// ---------------------------------------------------------------------------
// The one-variable construction: ℰ = End(K), K = Koszul complex of x,
// δ = x·e*, with e = E_10 and e* = E_01.

struct LemmaAlgebra {
    EndAlgebra alg;
    Atom e, estar;

    LemmaAlgebra()
        : alg(1, 1, koszul_delta(), Normalization::Module, 1),
          e(Atom{1, 0, {}}),
          estar(Atom{0, 1, {}}) {}

    static PolyMatrix koszul_delta() {
        PolyMatrix d(2, 2);
        d(0, 1) = Poly::var(0);
        return d;
    }
    static Ring ring() { return Ring({"x"}, {true}); }

    // a0[e*|…|e*] with j copies
    Chain word(const Atom& a0, std::size_t j, const Poly& c = Poly(1)) const {
        std::vector<Atom> atoms{a0};
        for (std::size_t k = 0; k < j; ++k) atoms.push_back(estar);
        return single(alg, atoms, c);
    }
};

inline Rational factorial(std::size_t n) {
    mpz_class r = 1;
    for (std::size_t k = 2; k <= n; ++k) r *= static_cast<unsigned long>(k);
    return Rational(r);
}

// e*[w] summed over all words w with `ne` copies of e and `ns` copies of e*.
inline Chain arrangements(const LemmaAlgebra& L, const Atom& a0, std::size_t ne, std::size_t ns,
                          const Poly& c = Poly(1)) {
    std::vector<int> v(ns, 0);
    v.resize(ns + ne, 1);
    Chain out;
    do {
        std::vector<Atom> w{a0};
        for (int t : v) w.push_back(t ? L.e : L.estar);
        L.alg.add(out, Word{0, w}, c);
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

struct PhiResult {
    ChainSeries phi;  // Σ_k ϖ_{j,k} u^k
};

// φ_j = Σ_{k<U} ϖ_{j,k} u^k with (b+uB)φ_j ≡ b ϖ_{j,0} mod u^U, where
// ϖ_{j,0} = e[e*|…|e*] and, for k ≥ 1,
// ϖ_{j,k} = (j+k−1)!/j! · Σ e*[w], w over arrangements of e^{k+1} and e*^{j+k−1}.
// For k = 1, 2 these agree with sh(e*[e|e] ⊗ φ_{j,k}).
inline PhiResult phi_construct(std::size_t j, std::size_t U, const LemmaAlgebra& L = LemmaAlgebra()) {
    if (U == 0) throw TruncationMismatch("truncation order must be positive");
    const EndAlgebra& A = L.alg;
    PhiResult res;
    res.phi.assign(U, Chain());
    res.phi[0] = L.word(L.e, j);
    for (std::size_t k = 1; k < U; ++k) {
        Rational c = factorial(j + k - 1) / factorial(j);
        res.phi[k] = arrangements(L, L.estar, k + 1, j + k - 1, Poly(c));
    }
    ChainSeries lhs = b_plus_uB(A, res.phi);
    for (std::size_t k = 0; k < U; ++k) {
        Chain expect = k == 0 ? b_op(A, res.phi[0]) : Chain();
        if (lhs[k] != expect)
            throw VerificationFailure("phi_" + std::to_string(j) + ": (b+uB)phi differs from b(varpi_0) at u^" +
                                      std::to_string(k));
    }
    return res;
}


// η_j = j!·id[e*^j] + j!·α·Σ_{k=0}^{j} x^{−(k+1)} φ_{j−k}, (b+uB+α)-closed mod u^U.
inline ChainSeries eta_construct(std::size_t j, std::size_t U, const LemmaAlgebra& L = LemmaAlgebra()) {
    const EndAlgebra& A = L.alg;
    Rational jf = factorial(j);
    ChainSeries eta(U);
    eta[0] = L.word(EndAlgebra::identity(), j, Poly(jf));
    for (std::size_t k = 0; k <= j; ++k) {
        PhiResult ph = phi_construct(j - k, U, L);
        Poly coeff = Poly::var(0, -static_cast<int>(k + 1)).scaled(jf);
        for (std::size_t t = 0; t < U; ++t) eta[t] += cech_alpha(ph.phi[t].scaled(coeff), 1);
    }
    ChainSeries d = cech_total_differential(A, eta, 1);
    for (std::size_t k = 0; k < U; ++k)
        if (!d[k].is_zero())
            throw VerificationFailure("eta_" + std::to_string(j) + " is not (b+uB+alpha)-closed at u^" +
                                      std::to_string(k));
    return eta;
}

// y^j = j!·id[e*^j]
inline Chain y_power(std::size_t j, const LemmaAlgebra& L = LemmaAlgebra()) {
    return L.word(EndAlgebra::identity(), j, Poly(factorial(j)));
}

inline Rational evaluate_at_origin(const Poly& p) {
    if (p.has_negative_exponents()) throw RingMismatch("cannot evaluate a Laurent polynomial at the origin");
    return p.constant_term();
}

// Augmentation Hoch(Λ) → ℚ, Λ = ℚ[e*] ⊂ ℰ: the id[] coefficient at x = 0.
// Entries must lie in Λ (identity or multiples of e*).
inline Rational trace_augmentation(const Chain& c, const LemmaAlgebra& L = LemmaAlgebra()) {
    Rational t = 0;
    for (const auto& [w, coeff] : c.terms()) {
        for (const auto& a : w.a)
            if (!(a.is_id() || a == L.estar))
                throw ShapeMismatch("chain entry outside the exterior subalgebra");
        if (w.cech != 0 || w.length() != 0 || !w.a[0].is_id()) continue;
        t += evaluate_at_origin(coeff);
    }
    return t;
}

}  // namespace mfhrr
