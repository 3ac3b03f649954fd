#pragma once

#include <string>
#include <vector>

#include "mfhrr/forms.hpp"
#include "mfhrr/groebner.hpp"
#include "mfhrr/hkr.hpp"
#include "mfhrr/matrix.hpp"

namespace mfhrr {

// Numerator g of g·dx1∧…∧dxn over denominators (g1,…,gn).
struct ResidueProblem {
    Poly numerator;
    std::vector<Poly> denominators;
};

// Monomial denominators x^a together with x_i^{a_i} = Σ_j c_ij g_j.
struct ResidueCover {
    std::vector<int> exponents;
    PolyMatrix cofactors;
    Poly det;
};

// Res[g dx/(x1^{a1},…,xn^{an})]: the coefficient of x^{a−1} in g.
inline Rational res_monomial(const Poly& g, const std::vector<int>& a) {
    if (a.size() > kMaxVars) throw IndexError("too many exponents");
    Monomial m;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] <= 0) throw IndexError("residue exponent must be positive, got " + std::to_string(a[i]));
        m.e[i] = static_cast<int16_t>(a[i] - 1);
    }
    if (g.has_negative_exponents()) throw RingMismatch("residue numerator must be a polynomial");
    for (const auto& t : g.terms())
        for (std::size_t i = a.size(); i < kMaxVars; ++i)
            if (t.m.e[i] != 0) throw RingMismatch("numerator involves a variable beyond the denominators");
    return g.coefficient(m);
}

// Cover with prescribed exponents: lifts each x_i^{a_i} into (g1,…,gn).
inline ResidueCover cover_with_exponents(const std::vector<Poly>& gens, const std::vector<int>& a,
                                         const GroebnerOptions& opt = {}) {
    std::size_t n = gens.size();
    if (a.size() != n) throw ShapeMismatch("one exponent per denominator is required");
    GroebnerOptions o = opt;
    o.track_cofactors = true;
    GroebnerBasis gb = buchberger(gens, o);
    ResidueCover cv{a, PolyMatrix(n, n), Poly()};
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] <= 0) throw IndexError("residue exponent must be positive");
        Poly target = Poly::var(i, a[i]);
        auto lift = gb.elems.empty() ? std::nullopt : try_lift({target}, gb);
        if (!lift) throw NotMember("x_" + std::to_string(i) + "^" + std::to_string(a[i]) + " is not in the ideal");
        Poly check;
        for (std::size_t j = 0; j < n; ++j) {
            cv.cofactors(i, j) = (*lift)[j];
            check += (*lift)[j] * gens[j];
        }
        if (check != target) throw InternalError("cover cofactors do not re-expand");
    }
    cv.det = determinant(cv.cofactors);
    return cv;
}

// Minimal exponents a_i with x_i^{a_i} in (g1,…,gn), plus cofactors.
inline ResidueCover minimal_cover(const std::vector<Poly>& gens, const GroebnerOptions& opt = {}) {
    std::size_t n = gens.size();
    if (n == 0) throw IsolatedSingularityError("no denominators");
    GroebnerBasis gb = buchberger(gens, opt);
    std::vector<Monomial> basis;
    try {
        basis = quotient_basis(gb, n);
    } catch (const NotZeroDimensional&) {
        throw IsolatedSingularityError("denominator ideal is not primary to the origin");
    }
    std::size_t dim = basis.size();
    std::vector<int> a(n);
    for (std::size_t i = 0; i < n; ++i) {
        int k = 1;
        while (!normal_form(Poly::var(i, k), gb).is_zero()) {
            if (static_cast<std::size_t>(k) > dim)
                throw IsolatedSingularityError("denominator ideal has zeros away from the origin");
            ++k;
        }
        a[i] = k;
    }
    return cover_with_exponents(gens, a, opt);
}

inline ResidueCover jacobian_cover(const Poly& f, std::size_t nvars, const GroebnerOptions& opt = {}) {
    check_isolated_singularity(f, nvars, opt);
    return minimal_cover(jacobian(f, nvars), opt);
}

inline Rational residue_with_cover(const Poly& g, const ResidueCover& cv) {
    return res_monomial(g * cv.det, cv.exponents);
}

inline Rational groth_residue(const ResidueProblem& p, const GroebnerOptions& opt = {}) {
    return residue_with_cover(p.numerator, minimal_cover(p.denominators, opt));
}

// Res[g dx/(∂1 f,…,∂n f)]
inline Rational jacobian_residue(const Poly& g, const Poly& f, std::size_t nvars, const GroebnerOptions& opt = {}) {
    return residue_with_cover(g, jacobian_cover(f, nvars, opt));
}

// Residue of a Čech-tagged form series on the cover {x_i ≠ 0}: the
// coefficient of x^{−1}·dx1∧…∧dxn in the α_{1…n} component, per u-power.
inline std::vector<Rational> cech_residue(const CechFormSeries& w, std::size_t nvars, std::size_t truncation) {
    std::vector<Rational> out(truncation);
    uint32_t full = nvars == 0 ? 0 : static_cast<uint32_t>((uint32_t{1} << nvars) - 1);
    auto it = w.find(full);
    if (it == w.end()) return out;
    Monomial inv;
    for (std::size_t i = 0; i < nvars; ++i) inv.e[i] = -1;
    for (std::size_t k = 0; k < truncation && k < it->second.truncation(); ++k)
        out[k] = it->second[k].coefficient(static_cast<FormMask>(full)).coefficient(inv);
    return out;
}

// Residue pairing matrix (g,h) ↦ Res[gh dx/∂f] on the Milnor-algebra basis.
inline Matrix<Rational> milnor_pairing(const Poly& f, std::size_t nvars, std::vector<Monomial>* basis_out = nullptr,
                                       const GroebnerOptions& opt = {}) {
    check_isolated_singularity(f, nvars, opt);
    std::vector<Monomial> basis = quotient_basis(buchberger(jacobian(f, nvars), opt), nvars);
    ResidueCover cv = minimal_cover(jacobian(f, nvars), opt);
    Matrix<Rational> m(basis.size(), basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = 0; j < basis.size(); ++j)
            m(i, j) = residue_with_cover(Poly::monomial(basis[i] * basis[j]), cv);
    if (basis_out) *basis_out = std::move(basis);
    return m;
}

inline std::size_t rational_rank(Matrix<Rational> m) {
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t p = r;
        while (p < m.rows() && sgn(m(p, c)) == 0) ++p;
        if (p == m.rows()) continue;
        for (std::size_t k = 0; k < m.cols(); ++k) std::swap(m(p, k), m(r, k));
        for (std::size_t i = r + 1; i < m.rows(); ++i) {
            if (sgn(m(i, c)) == 0) continue;
            Rational t = m(i, c) / m(r, c);
            for (std::size_t k = c; k < m.cols(); ++k) m(i, k) -= t * m(r, k);
        }
        ++r;
    }
    return r;
}

}  // namespace mfhrr
