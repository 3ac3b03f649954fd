#pragma once

#include <functional>
#include <map>
#include <vector>

#include "mfhrr/forms.hpp"
#include "mfhrr/hochschild.hpp"
#include "mfhrr/mf.hpp"

namespace mfhrr {

// Form series tagged by Čech symbols α_S.
using CechFormSeries = std::map<uint32_t, FormSeries>;

// tr∇ for the flat connection ∇ = d on the chosen basis: R = (dδ) entrywise,
// α' = (dα) entrywise, and
//   tr(α0[α1|…|αn]) = Σ_J Σ_{j0+…+jn=J} (−1)^J str(α0 R^{j0} α1' … αn' R^{jn}) / (n+J)!.
class TraceMap {
public:
    TraceMap(const EndAlgebra& A) : A_(A) {  // NOLINT(google-explicit-constructor)
        cap_ = A.nvars();
        R_ = GradedMatrixForm::differential(A.delta(), A.rank0(), A.nvars());
        Rpow_.push_back(GradedMatrixForm::identity(A.rank0(), A.rank1()));
        for (std::size_t k = 1; k <= cap_; ++k) Rpow_.push_back(Rpow_.back() * R_);
    }

    const GradedMatrixForm& curvature() const { return R_; }

    // Value on a single word without coefficient (Čech symbols ignored).
    DiffForm word(const Word& w) const {
        std::size_t n = w.length();
        DiffForm out;
        if (n > cap_) return out;
        std::size_t jcap = cap_ - n;
        // T[J] = α0 R^{j0} α1' R^{j1} … with total R-degree J
        std::vector<GradedMatrixForm> T(jcap + 1);
        GradedMatrixForm a0 = plain(w.a[0]);
        for (std::size_t J = 0; J <= jcap; ++J) T[J] = a0 * Rpow_[J];
        for (std::size_t k = 1; k <= n; ++k) {
            GradedMatrixForm ak = derivative(w.a[k]);
            if (ak.is_zero()) return out;
            std::vector<GradedMatrixForm> next(jcap + 1, GradedMatrixForm(A_.rank0(), A_.rank1()));
            for (std::size_t J = 0; J <= jcap; ++J) {
                if (T[J].is_zero()) continue;
                GradedMatrixForm left = T[J] * ak;
                for (std::size_t i = 0; J + i <= jcap; ++i) next[J + i] = next[J + i] + left * Rpow_[i];
            }
            T = std::move(next);
        }
        for (std::size_t J = 0; J <= jcap; ++J) {
            DiffForm s = supertrace(T[J]);
            if (s.is_zero()) continue;
            Rational w8 = Rational(J % 2 ? -1 : 1) / factorial(n + J);
            out += s.scaled(w8);
        }
        return out;
    }

    DiffForm chain(const Chain& c, uint32_t cech_filter = 0, bool filter = false) const {
        DiffForm out;
        for (const auto& [w, k] : c.terms()) {
            if (filter && w.cech != cech_filter) continue;
            if (!filter && w.cech != 0)
                throw ShapeMismatch("chain carries Čech symbols; use the Čech trace");
            out += k * word(w);
        }
        return out;
    }

    FormSeries series(const ChainSeries& x) const {
        FormSeries r(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) r[k] = chain(x[k]);
        return r;
    }

    CechFormSeries cech_series(const ChainSeries& x) const {
        CechFormSeries r;
        for (std::size_t k = 0; k < x.size(); ++k)
            for (const auto& [w, c] : x[k].terms()) {
                auto it = r.try_emplace(w.cech, FormSeries(x.size())).first;
                it->second[k] += c * word(w);
            }
        for (auto it = r.begin(); it != r.end();) it = it->second.is_zero() ? r.erase(it) : std::next(it);
        return r;
    }

private:
    const EndAlgebra& A_;
    std::size_t cap_;
    GradedMatrixForm R_;
    std::vector<GradedMatrixForm> Rpow_;
    mutable std::map<Atom, GradedMatrixForm> plain_, deriv_;

    const GradedMatrixForm& plain(const Atom& a) const {
        auto it = plain_.find(a);
        if (it == plain_.end())
            it = plain_.emplace(a, GradedMatrixForm::from_poly(A_.matrix(a), A_.rank0())).first;
        return it->second;
    }
    const GradedMatrixForm& derivative(const Atom& a) const {
        auto it = deriv_.find(a);
        if (it == deriv_.end())
            it = deriv_.emplace(a, GradedMatrixForm::differential(A_.matrix(a), A_.rank0(), A_.nvars())).first;
        return it->second;
    }
};

inline FormSeries tr_nabla(const EndAlgebra& A, const ChainSeries& x) { return TraceMap(A).series(x); }
inline DiffForm tr_nabla(const EndAlgebra& A, const Chain& x) { return TraceMap(A).chain(x); }
inline CechFormSeries tr_nabla_cech(const EndAlgebra& A, const ChainSeries& x) { return TraceMap(A).cech_series(x); }

// Segal map exp(−δ): inserts j_i copies of δ after α_i, sign (−1)^J, keeping
// words of length ≤ max_len.
inline Chain segal_map(const EndAlgebra& A, const Chain& c, std::size_t max_len) {
    if (A.mode() != Normalization::Scalar) throw ShapeMismatch("the Segal map needs scalar normalization");
    LinComb delta = A.decompose(A.delta());
    Chain out;
    for (const auto& [w, k] : c.terms()) {
        std::size_t n = w.length();
        if (n > max_len) continue;
        std::vector<LinComb> single_atoms;
        for (const auto& a : w.a) single_atoms.push_back({{a, Poly(1)}});
        // distribute J extra δ entries over the n+1 gaps
        std::vector<std::size_t> j(n + 1, 0);
        std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t gap, std::size_t left) {
            if (gap == n) {
                j[n] = left;
                std::size_t J = 0;
                std::vector<const LinComb*> entries;
                for (std::size_t i = 0; i <= n; ++i) {
                    entries.push_back(&single_atoms[i]);
                    for (std::size_t t = 0; t < j[i]; ++t) entries.push_back(&delta);
                    J += j[i];
                }
                expand_into(A, out, w.cech, entries, J % 2 ? -k : k);
                return;
            }
            for (std::size_t t = 0; t <= left; ++t) {
                j[gap] = t;
                rec(gap + 1, left - t);
            }
        };
        for (std::size_t J = 0; n + J <= max_len; ++J) rec(0, J);
    }
    return out;
}

// Classical HKR map a0[a1|…|am] ↦ str(a0 da1 ∧ … ∧ dam)/m!.
inline DiffForm classical_hkr(const EndAlgebra& A, const Chain& c) {
    DiffForm out;
    for (const auto& [w, k] : c.terms()) {
        if (w.cech != 0) throw ShapeMismatch("chain carries Čech symbols");
        std::size_t m = w.length();
        if (m > A.nvars()) continue;
        GradedMatrixForm p = GradedMatrixForm::from_poly(A.matrix(w.a[0]), A.rank0());
        for (std::size_t t = 1; t <= m && !p.is_zero(); ++t)
            p = p * GradedMatrixForm::differential(A.matrix(w.a[t]), A.rank0(), A.nvars());
        out += k * supertrace(p).scaled(Rational(1) / factorial(m));
    }
    return out;
}

// Classical HKR after the Segal map; agrees with tr∇ for the flat connection.
inline DiffForm hkr_segal(const EndAlgebra& A, const Chain& c) {
    return classical_hkr(A, segal_map(A, c, A.nvars()));
}

// ---------------------------------------------------------------------------
// Chern forms

struct ChernForm {
    FormSeries series;
    Poly f;
    std::size_t nvars = 0;

    // Coefficient of dx1∧…∧dxn in the u^0 component.
    Poly top_coefficient() const {
        FormMask top = nvars == 0 ? 0 : static_cast<FormMask>((FormMask{1} << nvars) - 1);
        return series[0].coefficient(top);
    }
    DiffForm degree_part(int k) const { return series[0].degree_part(k); }
};

// tr∇(id[]) = Σ_J (−1)^J str((dδ)^J)/J!
inline ChernForm chern_form(const MatrixFactorization& P, std::size_t truncation = FormSeries::kDefaultTruncation) {
    EndAlgebra A = EndAlgebra::of(P, Normalization::Scalar);
    Chain one = single(A, {EndAlgebra::identity()});
    ChernForm c{FormSeries(truncation, TraceMap(A).chain(one)), P.f(), P.ring().nvars()};
    return c;
}

// u^k ω_j ↦ (−1)^{j+k} u^k ω_j: the form-degree sign together with u ↦ −u.
inline FormSeries gamma_twist(const FormSeries& w) {
    FormSeries r(w.truncation());
    for (std::size_t k = 0; k < w.truncation(); ++k)
        for (const auto& [s, p] : w[k].components()) {
            bool neg = (popcount(s) + k) % 2;
            r[k] += DiffForm::component(s, neg ? -p : p);
        }
    return r;
}

// ---------------------------------------------------------------------------
// Todd series via the superdeterminant

// Power-series coefficients c_0..c_order of −x/(1 − e^x) = x/(e^x − 1).
inline std::vector<Rational> todd_generating_series(std::size_t order) {
    // x/(e^x − 1) = 1 / Σ_{k≥0} x^k/(k+1)!
    std::vector<Rational> g(order + 1), inv(order + 1);
    for (std::size_t k = 0; k <= order; ++k) g[k] = Rational(1) / factorial(k + 1);
    inv[0] = 1;
    for (std::size_t k = 1; k <= order; ++k) {
        Rational s = 0;
        for (std::size_t i = 1; i <= k; ++i) s += g[i] * inv[k - i];
        inv[k] = -s;
    }
    return inv;
}

// log of a series with constant term 1.
inline std::vector<Rational> series_log(const std::vector<Rational>& a) {
    std::size_t n = a.size();
    std::vector<Rational> l(n);
    if (n == 0) return l;
    if (a[0] != 1) throw InternalError("series_log needs constant term 1");
    // l' = a'/a  ⇒  k l_k = k a_k − Σ_{i=1}^{k−1} i l_i a_{k−i}
    for (std::size_t k = 1; k < n; ++k) {
        Rational s = Rational(static_cast<long>(k)) * a[k];
        for (std::size_t i = 1; i < k; ++i) s -= Rational(static_cast<long>(i)) * l[i] * a[k - i];
        l[k] = s / Rational(static_cast<long>(k));
    }
    return l;
}

inline std::size_t nilpotency_index(const GradedMatrixForm& R, std::size_t bound) {
    GradedMatrixForm p = R;
    for (std::size_t k = 1; k <= bound; ++k) {
        if (p.is_zero()) return k;
        p = p * R;
    }
    throw NonNilpotent("curvature form is not nilpotent within " + std::to_string(bound) + " powers");
}

// sdet(F(R)) = exp(str log F(R)), F(x) = −x/(1 − e^x), for nilpotent R of
// even total parity; the series stops at the nilpotency index.
inline FormSeries todd_sdet(const GradedMatrixForm& R, std::size_t nvars,
                            std::size_t truncation = FormSeries::kDefaultTruncation) {
    if (R.total_parity() == 1) throw ParityError("Todd series needs an even form-matrix");
    std::size_t bound = nvars + R.size() + 1;
    std::size_t nil = nilpotency_index(R, bound);
    std::vector<Rational> lg = series_log(todd_generating_series(nil));
    DiffForm s;
    GradedMatrixForm p = GradedMatrixForm::identity(R.rank0(), R.rank1());
    for (std::size_t k = 1; k < nil; ++k) {
        p = p * R;
        if (sgn(lg[k]) != 0) s += supertrace(p).scaled(lg[k]);
    }
    // the 0-form part of a nilpotent R is a nilpotent scalar matrix
    if (!s.degree_part(0).is_zero()) throw InternalError("supertrace of log F(R) has a 0-form part");
    DiffForm result(Poly(1)), term(Poly(1));
    for (std::size_t k = 1; k <= nvars + 1; ++k) {
        term = wedge(term, s).scaled(Rational(1, static_cast<long>(k)));
        if (term.is_zero()) break;
        result += term;
    }
    return FormSeries(truncation, result);
}

}  // namespace mfhrr
