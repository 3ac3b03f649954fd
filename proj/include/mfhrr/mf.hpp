#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mfhrr/forms.hpp"
#include "mfhrr/matrix.hpp"
#include "mfhrr/poly.hpp"

namespace mfhrr {

inline std::string entry_label(const char* what, std::size_t i, std::size_t j) {
    return std::string(what) + "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

// Z/2-graded free module E⁰ ⊕ E¹ with an odd endomorphism δ, δ² = f·id.
// Basis order: the rank0 even vectors first, then the rank1 odd vectors.
class MatrixFactorization {
public:
    MatrixFactorization() = default;

    // Validating constructor.
    static MatrixFactorization make(Ring ring, Poly f, PolyMatrix delta0, PolyMatrix delta1) {
        MatrixFactorization m;
        m.ring_ = std::move(ring);
        m.f_ = std::move(f);
        m.r0_ = delta0.cols();
        m.r1_ = delta0.rows();
        m.delta0_ = std::move(delta0);
        m.delta1_ = std::move(delta1);
        m.validate();
        return m;
    }

    const Ring& ring() const { return ring_; }
    const Poly& f() const { return f_; }
    std::size_t rank0() const { return r0_; }
    std::size_t rank1() const { return r1_; }
    std::size_t rank() const { return r0_ + r1_; }
    const PolyMatrix& delta0() const { return delta0_; }
    const PolyMatrix& delta1() const { return delta1_; }
    int parity(std::size_t i) const { return i < r0_ ? 0 : 1; }
    std::vector<int> parities() const {
        std::vector<int> p(rank());
        for (std::size_t i = 0; i < rank(); ++i) p[i] = parity(i);
        return p;
    }

    // δ as a (r0+r1)×(r0+r1) odd matrix.
    PolyMatrix delta() const {
        PolyMatrix d(rank(), rank());
        d.set_block(0, r0_, delta1_);
        d.set_block(r0_, 0, delta0_);
        return d;
    }

    static MatrixFactorization from_delta(Ring ring, Poly f, const PolyMatrix& d, std::size_t r0) {
        std::size_t n = d.rows();
        if (d.cols() != n || r0 > n) throw ShapeMismatch("odd endomorphism must be square");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (((i < r0) == (j < r0)) && !d(i, j).is_zero())
                    throw ParityError("endomorphism has an even component at " + entry_label("delta", i, j));
        return make(std::move(ring), std::move(f), d.block(r0, 0, n - r0, r0), d.block(0, r0, r0, n - r0));
    }

    friend bool operator==(const MatrixFactorization& a, const MatrixFactorization& b) {
        return a.f_ == b.f_ && a.delta0_ == b.delta0_ && a.delta1_ == b.delta1_ && a.r0_ == b.r0_ &&
               a.r1_ == b.r1_;
    }

private:
    Ring ring_;
    Poly f_;
    std::size_t r0_ = 0, r1_ = 0;
    PolyMatrix delta0_, delta1_;

    void validate() const {
        if (delta1_.rows() != r0_ || delta1_.cols() != r1_)
            throw ShapeMismatch("delta1 must be " + std::to_string(r0_) + "x" + std::to_string(r1_) + ", got " +
                                delta1_.shape());
        if (!f_.is_zero() && (r0_ == 0 || r1_ == 0))
            throw FactorizationError("nonzero potential needs positive ranks in both degrees");
        ring_.check(f_);
        for (const auto* m : {&delta0_, &delta1_})
            for (std::size_t i = 0; i < m->rows(); ++i)
                for (std::size_t j = 0; j < m->cols(); ++j) ring_.check((*m)(i, j));
        check_product(delta1_ * delta0_, "delta1*delta0");
        check_product(delta0_ * delta1_, "delta0*delta1");
    }
    void check_product(const PolyMatrix& p, const char* what) const {
        for (std::size_t i = 0; i < p.rows(); ++i)
            for (std::size_t j = 0; j < p.cols(); ++j) {
                Poly expect = i == j ? f_ : Poly();
                if (p(i, j) != expect)
                    throw FactorizationError(entry_label(what, i, j) + " = " + ring_.format(p(i, j)) +
                                             ", expected " + ring_.format(expect));
            }
    }
};

inline MatrixFactorization mf_new(const Ring& ring, const Poly& f, const PolyMatrix& delta0, const PolyMatrix& delta1) {
    return MatrixFactorization::make(ring, f, delta0, delta1);
}

// ℤ/2 complex of free modules: d0: C⁰→C¹ (rank1×rank0), d1: C¹→C⁰.
struct Z2Complex {
    std::size_t rank0 = 0, rank1 = 0;
    PolyMatrix d0, d1;

    static Z2Complex make(PolyMatrix d0, PolyMatrix d1) {
        Z2Complex c{d0.cols(), d0.rows(), std::move(d0), std::move(d1)};
        if (c.d1.rows() != c.rank0 || c.d1.cols() != c.rank1) throw ShapeMismatch("d1 has the wrong shape");
        if (!(c.d1 * c.d0).is_zero() || !(c.d0 * c.d1).is_zero())
            throw FactorizationError("differential does not square to zero");
        return c;
    }
};

// Exterior basis on n generators: even subsets then odd subsets, each ordered
// by size and then lexicographically.
struct ExteriorBasis {
    std::vector<FormMask> even, odd;
    std::vector<std::size_t> index;  // mask -> position within its parity block

    explicit ExteriorBasis(std::size_t n) : index(std::size_t{1} << n) {
        std::vector<FormMask> all;
        for (FormMask s = 0; s < (FormMask{1} << n); ++s) all.push_back(s);
        auto key = [](FormMask s) {
            std::vector<int> v;
            for (FormMask t = s; t; t &= t - 1) v.push_back(std::countr_zero(t));
            return std::make_pair(std::popcount(s), v);
        };
        std::sort(all.begin(), all.end(), [&](FormMask a, FormMask b) { return key(a) < key(b); });
        for (FormMask s : all) {
            auto& blk = (std::popcount(s) % 2 == 0) ? even : odd;
            index[s] = blk.size();
            blk.push_back(s);
        }
    }
    // Position in the full (even then odd) basis.
    std::size_t full_index(FormMask s) const {
        return std::popcount(s) % 2 == 0 ? index[s] : even.size() + index[s];
    }
    FormMask mask_at(std::size_t k) const { return k < even.size() ? even[k] : odd[k - even.size()]; }
    std::size_t size() const { return even.size() + odd.size(); }
};

// Sign of e_i ∧ e_S and of the contraction ι_i(e_S): (−1)^{#{s∈S : s<i}}.
inline int koszul_sign(FormMask s, std::size_t i) {
    return (std::popcount(s & ((FormMask{1} << i) - 1)) % 2) ? -1 : 1;
}

// Matrices of e_i∧ and ι_i on the full exterior basis.
inline PolyMatrix exterior_mult(const ExteriorBasis& B, std::size_t i) {
    PolyMatrix m(B.size(), B.size());
    for (std::size_t c = 0; c < B.size(); ++c) {
        FormMask s = B.mask_at(c);
        if (s & (FormMask{1} << i)) continue;
        m(B.full_index(s | (FormMask{1} << i)), c) = Poly(koszul_sign(s, i));
    }
    return m;
}
inline PolyMatrix exterior_contract(const ExteriorBasis& B, std::size_t i) {
    PolyMatrix m(B.size(), B.size());
    for (std::size_t c = 0; c < B.size(); ++c) {
        FormMask s = B.mask_at(c);
        if (!(s & (FormMask{1} << i))) continue;
        m(B.full_index(s & ~(FormMask{1} << i)), c) = Poly(koszul_sign(s, i));
    }
    return m;
}

// δ = Σ a_i ι_i + b_i e_i∧ on Λ(e_1..e_n), potential Σ a_i b_i.
inline MatrixFactorization koszul_mf(const Ring& ring, const std::vector<Poly>& a, const std::vector<Poly>& b) {
    if (a.empty() || a.size() != b.size()) throw ShapeMismatch("koszul_mf needs equal-length non-empty lists");
    if (a.size() > 12) throw IndexError("too many Koszul generators");
    std::size_t n = a.size();
    ExteriorBasis B(n);
    PolyMatrix d(B.size(), B.size());
    Poly f;
    for (std::size_t i = 0; i < n; ++i) {
        if (!a[i].is_zero()) d = d + a[i] * exterior_contract(B, i);
        if (!b[i].is_zero()) d = d + b[i] * exterior_mult(B, i);
        f += a[i] * b[i];
    }
    return MatrixFactorization::from_delta(ring, f, d, B.even.size());
}

inline void check_same_ring(const Ring& a, const Ring& b) {
    if (!(a == b)) throw RingMismatch("factorizations live over different variable lists");
}

inline MatrixFactorization dual_mf(const MatrixFactorization& P) {
    return MatrixFactorization::make(P.ring(), -P.f(), P.delta1().transpose(), -P.delta0().transpose());
}

inline MatrixFactorization shift_mf(const MatrixFactorization& P) {
    return MatrixFactorization::make(P.ring(), P.f(), -P.delta1(), -P.delta0());
}

inline MatrixFactorization unit_mf(const Ring& ring) {
    return MatrixFactorization::make(ring, Poly(), PolyMatrix(0, 1), PolyMatrix(1, 0));
}

inline MatrixFactorization direct_sum(const MatrixFactorization& P, const MatrixFactorization& Q) {
    check_same_ring(P.ring(), Q.ring());
    if (P.f() != Q.f()) throw PotentialMismatch("direct sum of factorizations of different potentials");
    PolyMatrix d0(P.rank1() + Q.rank1(), P.rank0() + Q.rank0());
    PolyMatrix d1(P.rank0() + Q.rank0(), P.rank1() + Q.rank1());
    d0.set_block(0, 0, P.delta0());
    d0.set_block(P.rank1(), P.rank0(), Q.delta0());
    d1.set_block(0, 0, P.delta1());
    d1.set_block(P.rank0(), P.rank1(), Q.delta1());
    return MatrixFactorization::make(P.ring(), P.f(), d0, d1);
}

// Basis of E⊗F: even = E0⊗F0, E1⊗F1; odd = E0⊗F1, E1⊗F0; lexicographic in
// (i, k) inside each block.
struct TensorIndex {
    std::size_t p0, p1, r0, r1;
    std::vector<std::size_t> pos;  // (i * nR + k) -> full index

    TensorIndex(std::size_t p0_, std::size_t p1_, std::size_t r0_, std::size_t r1_)
        : p0(p0_), p1(p1_), r0(r0_), r1(r1_), pos((p0_ + p1_) * (r0_ + r1_)) {
        std::size_t nR = r0 + r1, next = 0;
        auto fill = [&](std::size_t ib, std::size_t ie, std::size_t kb, std::size_t ke) {
            for (std::size_t i = ib; i < ie; ++i)
                for (std::size_t k = kb; k < ke; ++k) pos[i * nR + k] = next++;
        };
        fill(0, p0, 0, r0);
        fill(p0, p0 + p1, r0, nR);
        fill(0, p0, r0, nR);
        fill(p0, p0 + p1, 0, r0);
    }
    std::size_t even_rank() const { return p0 * r0 + p1 * r1; }
    std::size_t size() const { return (p0 + p1) * (r0 + r1); }
    std::size_t at(std::size_t i, std::size_t k) const { return pos[i * (r0 + r1) + k]; }
    int left_parity(std::size_t i) const { return i < p0 ? 0 : 1; }

    // a ⊗ 1
    PolyMatrix left(const PolyMatrix& a) const {
        std::size_t nR = r0 + r1;
        PolyMatrix m(size(), size());
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) {
                if (a(i, j).is_zero()) continue;
                for (std::size_t k = 0; k < nR; ++k) m(at(i, k), at(j, k)) = a(i, j);
            }
        return m;
    }
    // 1 ⊗ b for b homogeneous of parity `parity`: (1⊗b)(x⊗y) = (−1)^{|b||x|} x⊗by
    PolyMatrix right(const PolyMatrix& b, int parity) const {
        std::size_t nP = p0 + p1;
        PolyMatrix m(size(), size());
        for (std::size_t i = 0; i < nP; ++i) {
            bool neg = parity && left_parity(i);
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l) {
                    if (b(k, l).is_zero()) continue;
                    m(at(i, k), at(i, l)) = neg ? -b(k, l) : b(k, l);
                }
        }
        return m;
    }
};

inline TensorIndex tensor_index(const MatrixFactorization& P, const MatrixFactorization& R) {
    return TensorIndex(P.rank0(), P.rank1(), R.rank0(), R.rank1());
}

inline MatrixFactorization tensor_mf(const MatrixFactorization& P, const MatrixFactorization& R) {
    check_same_ring(P.ring(), R.ring());
    TensorIndex T = tensor_index(P, R);
    PolyMatrix d = T.left(P.delta()) + T.right(R.delta(), 1);
    try {
        return MatrixFactorization::from_delta(P.ring(), P.f() + R.f(), d, T.even_rank());
    } catch (const FactorizationError& e) {
        throw InternalError(std::string("tensor product failed validation: ") + e.what());
    }
}

// Coordinates of Hom(P, Q): φ is a rank(Q)×rank(P) matrix; entry (i, j) has
// parity p_Q(i) + p_P(j).  Even and odd coordinates are listed row-major.
struct HomBasis {
    std::vector<std::pair<std::size_t, std::size_t>> even, odd;
    std::size_t nq = 0, np = 0;

    HomBasis(const MatrixFactorization& P, const MatrixFactorization& Q) : nq(Q.rank()), np(P.rank()) {
        for (std::size_t i = 0; i < nq; ++i)
            for (std::size_t j = 0; j < np; ++j) {
                if ((Q.parity(i) + P.parity(j)) % 2 == 0) even.emplace_back(i, j);
                else odd.emplace_back(i, j);
            }
    }
};

// d(φ) = δ_Q∘φ − (−1)^{|φ|} φ∘δ_P
inline Z2Complex hom_complex(const MatrixFactorization& P, const MatrixFactorization& Q) {
    check_same_ring(P.ring(), Q.ring());
    if (P.f() != Q.f())
        throw PotentialMismatch("hom_complex needs a common potential (" + P.ring().format(P.f()) + " vs " +
                                Q.ring().format(Q.f()) + ")");
    HomBasis H(P, Q);
    PolyMatrix dP = P.delta(), dQ = Q.delta();
    auto build = [&](const auto& src, const auto& dst, int parity) {
        PolyMatrix d(dst.size(), src.size());
        for (std::size_t c = 0; c < src.size(); ++c) {
            auto [i, j] = src[c];
            // δ_Q E_ij = Σ_k δQ(k,i) E_kj ;  E_ij δ_P = Σ_l δP(j,l) E_il
            PolyMatrix phi(H.nq, H.np);
            for (std::size_t k = 0; k < H.nq; ++k)
                if (!dQ(k, i).is_zero()) phi(k, j) += dQ(k, i);
            for (std::size_t l = 0; l < H.np; ++l)
                if (!dP(j, l).is_zero()) phi(i, l) += parity ? dP(j, l) : -dP(j, l);
            for (std::size_t r = 0; r < dst.size(); ++r) d(r, c) = phi(dst[r].first, dst[r].second);
        }
        return d;
    };
    return Z2Complex::make(build(H.even, H.odd, 0), build(H.odd, H.even, 1));
}

// Square matrix of differential forms over a Z/2-graded basis.  Forms are
// written to the left of the matrix units, so
//   (MN)_il = Σ_j (−1)^{|N_jl|(p_i+p_j)} M_ij ∧ N_jl.
class GradedMatrixForm {
public:
    GradedMatrixForm() = default;
    GradedMatrixForm(std::size_t r0, std::size_t r1) : r0_(r0), r1_(r1), a_(r0 + r1, r0 + r1) {}

    static GradedMatrixForm from_poly(const PolyMatrix& m, std::size_t r0) {
        if (m.rows() != m.cols() || r0 > m.rows()) throw ShapeMismatch("graded matrix must be square");
        GradedMatrixForm g(r0, m.rows() - r0);
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j)
                if (!m(i, j).is_zero()) g.a_(i, j) = DiffForm(m(i, j));
        return g;
    }
    // Entrywise de Rham differential of a polynomial matrix.
    static GradedMatrixForm differential(const PolyMatrix& m, std::size_t r0, std::size_t nvars) {
        if (m.rows() != m.cols() || r0 > m.rows()) throw ShapeMismatch("graded matrix must be square");
        GradedMatrixForm g(r0, m.rows() - r0);
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j)
                if (!m(i, j).is_zero()) g.a_(i, j) = exterior_d(m(i, j), nvars);
        return g;
    }
    static GradedMatrixForm identity(std::size_t r0, std::size_t r1) {
        GradedMatrixForm g(r0, r1);
        for (std::size_t i = 0; i < r0 + r1; ++i) g.a_(i, i) = DiffForm(Poly(1));
        return g;
    }

    std::size_t rank0() const { return r0_; }
    std::size_t rank1() const { return r1_; }
    std::size_t size() const { return r0_ + r1_; }
    int parity(std::size_t i) const { return i < r0_ ? 0 : 1; }
    DiffForm& operator()(std::size_t i, std::size_t j) { return a_(i, j); }
    const DiffForm& operator()(std::size_t i, std::size_t j) const { return a_(i, j); }

    bool is_zero() const {
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = 0; j < size(); ++j)
                if (!a_(i, j).is_zero()) return false;
        return true;
    }

    // Total parity (form degree + matrix parity) if homogeneous, else -1.
    int total_parity() const {
        int par = -2;
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = 0; j < size(); ++j)
                for (const auto& [s, p] : a_(i, j).components()) {
                    int q = (popcount(s) + parity(i) + parity(j)) % 2;
                    if (par == -2) par = q;
                    else if (par != q) return -1;
                }
        return par == -2 ? 0 : par;
    }

    friend GradedMatrixForm operator*(const GradedMatrixForm& m, const GradedMatrixForm& n) {
        check_shape(m, n);
        GradedMatrixForm r(m.r0_, m.r1_);
        std::size_t sz = m.size();
        for (std::size_t i = 0; i < sz; ++i)
            for (std::size_t j = 0; j < sz; ++j) {
                const DiffForm& a = m.a_(i, j);
                if (a.is_zero()) continue;
                bool odd_unit = (m.parity(i) + m.parity(j)) % 2;
                for (std::size_t l = 0; l < sz; ++l) {
                    const DiffForm& b = n.a_(j, l);
                    if (b.is_zero()) continue;
                    if (!odd_unit) {
                        r.a_(i, l) += wedge(a, b);
                        continue;
                    }
                    for (const auto& [t, q] : b.components()) {
                        DiffForm piece = wedge(a, DiffForm::component(t, q));
                        if (popcount(t) % 2) r.a_(i, l) -= piece;
                        else r.a_(i, l) += piece;
                    }
                }
            }
        return r;
    }
    friend GradedMatrixForm operator+(const GradedMatrixForm& m, const GradedMatrixForm& n) {
        check_shape(m, n);
        GradedMatrixForm r = m;
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = 0; j < m.size(); ++j) r.a_(i, j) += n.a_(i, j);
        return r;
    }
    friend GradedMatrixForm operator-(const GradedMatrixForm& m, const GradedMatrixForm& n) {
        check_shape(m, n);
        GradedMatrixForm r = m;
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = 0; j < m.size(); ++j) r.a_(i, j) -= n.a_(i, j);
        return r;
    }
    GradedMatrixForm scaled(const Poly& c) const {
        GradedMatrixForm r(r0_, r1_);
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = 0; j < size(); ++j)
                if (!a_(i, j).is_zero()) r.a_(i, j) = c * a_(i, j);
        return r;
    }
    // Keeps only entries' components of form degree k.
    GradedMatrixForm degree_part(int k) const {
        GradedMatrixForm r(r0_, r1_);
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = 0; j < size(); ++j) r.a_(i, j) = a_(i, j).degree_part(k);
        return r;
    }

    friend bool operator==(const GradedMatrixForm& a, const GradedMatrixForm& b) {
        return a.r0_ == b.r0_ && a.r1_ == b.r1_ && a.a_ == b.a_;
    }

private:
    std::size_t r0_ = 0, r1_ = 0;
    Matrix<DiffForm> a_;

    static void check_shape(const GradedMatrixForm& m, const GradedMatrixForm& n) {
        if (m.r0_ != n.r0_ || m.r1_ != n.r1_) throw ShapeMismatch("graded form-matrices have different block ranks");
    }
};

inline DiffForm supertrace(const GradedMatrixForm& m) {
    DiffForm s;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.parity(i)) s -= m(i, i);
        else s += m(i, i);
    }
    return s;
}

}  // namespace mfhrr
