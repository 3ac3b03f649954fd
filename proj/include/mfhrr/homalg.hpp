#pragma once

#include <vector>

#include "mfhrr/groebner.hpp"
#include "mfhrr/mf.hpp"

namespace mfhrr {

struct ExtReport {
    std::size_t dim_ext0 = 0, dim_ext1 = 0;
    long chi = 0;
    GroebnerStats stats;  // summed over the four Gröbner computations
};

inline std::vector<PolyVector> columns(const PolyMatrix& m) {
    std::vector<PolyVector> out(m.cols(), PolyVector(m.rows()));
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) out[j][i] = m(i, j);
    return out;
}

// Cohomology dimensions of a ℤ/2 complex: H⁰ = ker d0 / im d1, H¹ = ker d1 / im d0.
inline ExtReport complex_cohomology(const Z2Complex& C, std::size_t nvars, const GroebnerOptions& opt = {}) {
    ExtReport rep;
    auto h = [&](const PolyMatrix& d, const PolyMatrix& prev, std::size_t rank) {
        auto ker = module_kernel(d, opt);
        auto sq = subquotient_report(ker, columns(prev), rank, nvars, opt);
        rep.stats.spairs += sq.stats.spairs;
        rep.stats.basis_size += sq.stats.basis_size;
        return sq.dim;
    };
    rep.dim_ext0 = h(C.d0, C.d1, C.rank0);
    rep.dim_ext1 = h(C.d1, C.d0, C.rank1);
    rep.chi = static_cast<long>(rep.dim_ext0) - static_cast<long>(rep.dim_ext1);
    return rep;
}

inline ExtReport ext_dims(const MatrixFactorization& P, const MatrixFactorization& Q, const GroebnerOptions& opt = {}) {
    Z2Complex H = hom_complex(P, Q);
    check_isolated_singularity(P.f(), P.ring().nvars(), opt);
    return complex_cohomology(H, P.ring().nvars(), opt);
}

inline long euler_chi(const MatrixFactorization& P, const MatrixFactorization& Q, const GroebnerOptions& opt = {}) {
    return ext_dims(P, Q, opt).chi;
}

inline long complex_euler(const Z2Complex& C, std::size_t nvars, const GroebnerOptions& opt = {}) {
    return complex_cohomology(C, nvars, opt).chi;
}

// The Koszul complex K(a) as a ℤ/2 complex (a factorization of zero).
inline Z2Complex koszul_complex(const Ring& ring, const std::vector<Poly>& a) {
    auto K = koszul_mf(ring, a, std::vector<Poly>(a.size()));
    return Z2Complex::make(K.delta0(), K.delta1());
}

}  // namespace mfhrr
