#pragma once

#include <random>
#include <vector>

#include "mfhrr/forms.hpp"
#include "mfhrr/matrix.hpp"
#include "mfhrr/poly.hpp"

namespace testing_support {

using namespace mfhrr;

inline Poly random_poly(std::mt19937_64& rng, std::size_t nvars, int max_deg = 3, int max_terms = 4,
                        int coef = 5) {
    std::uniform_int_distribution<int> nterms(0, max_terms);
    std::uniform_int_distribution<int> deg(0, max_deg);
    std::uniform_int_distribution<int> c(-coef, coef);
    std::uniform_int_distribution<std::size_t> var(0, nvars - 1);
    std::vector<Term> ts;
    int k = nterms(rng);
    for (int t = 0; t < k; ++t) {
        Monomial m;
        int d = deg(rng);
        for (int i = 0; i < d; ++i) ++m.e[var(rng)];
        ts.push_back({m, Rational(c(rng))});
    }
    return Poly::from_terms(std::move(ts));
}

inline DiffForm random_form(std::mt19937_64& rng, std::size_t nvars, int max_comps = 3) {
    std::uniform_int_distribution<int> n(0, max_comps);
    std::uniform_int_distribution<FormMask> mask(0, (FormMask{1} << nvars) - 1);
    DiffForm w;
    int k = n(rng);
    for (int t = 0; t < k; ++t) w.add(mask(rng), random_poly(rng, nvars, 2, 3));
    return w;
}

inline DiffForm random_homogeneous_form(std::mt19937_64& rng, std::size_t nvars, int degree) {
    DiffForm w;
    for (FormMask s = 0; s < (FormMask{1} << nvars); ++s)
        if (popcount(s) == degree) w.add(s, random_poly(rng, nvars, 2, 2));
    return w;
}

inline PolyMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, std::size_t nvars,
                                int max_deg = 2, int max_terms = 2) {
    PolyMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = random_poly(rng, nvars, max_deg, max_terms, 3);
    return m;
}

}  // namespace testing_support
