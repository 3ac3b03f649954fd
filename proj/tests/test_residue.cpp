#include <gtest/gtest.h>

#include <random>

#include "mfhrr/residue.hpp"
#include "support.hpp"

using namespace mfhrr;
using testing_support::random_poly;

namespace {

Ring R1({"x"}), R2({"x", "y"}), R3({"x", "y", "z"});

// One-variable residue at 0 of h/p by Laurent expansion: p = x^m·v, v(0) ≠ 0.
Rational residue_1d(const std::vector<Rational>& h, const std::vector<Rational>& p) {
    std::size_t m = 0;
    while (m < p.size() && sgn(p[m]) == 0) ++m;
    std::vector<Rational> v(p.begin() + static_cast<long>(m), p.end());
    if (m == 0) return 0;
    // coefficient of x^{m−1} in h·v^{-1}
    std::vector<Rational> inv(m);
    inv[0] = 1 / v[0];
    for (std::size_t k = 1; k < m; ++k) {
        Rational s = 0;
        for (std::size_t i = 1; i <= k && i < v.size(); ++i) s += v[i] * inv[k - i];
        inv[k] = -s / v[0];
    }
    Rational out = 0;
    for (std::size_t i = 0; i < m && i < h.size(); ++i) out += h[i] * inv[m - 1 - i];
    return out;
}

std::vector<Rational> coeffs_in(const Poly& p, std::size_t var, std::size_t len) {
    std::vector<Rational> c(len);
    for (const auto& t : p.terms())
        if (static_cast<std::size_t>(t.m.e[var]) < len) c[t.m.e[var]] += t.c;
    return c;
}

// Res[g dx dy/(p(x), q(y))] for separable denominators and g = Σ g_ij x^i y^j.
Rational separable_residue(const Poly& g, const Poly& p, const Poly& q) {
    Rational out = 0;
    for (const auto& t : g.terms()) {
        Poly gx = Poly::var(0, t.m.e[0]), gy = Poly::var(1, t.m.e[1]);
        std::size_t L = 16;
        out += t.c * residue_1d(coeffs_in(gx, 0, L), coeffs_in(p, 0, L)) *
               residue_1d(coeffs_in(gy, 1, L), coeffs_in(q, 1, L));
    }
    return out;
}

Poly hessian_det(const Poly& f, std::size_t n) {
    PolyMatrix H(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) H(i, j) = f.partial(i).partial(j);
    return determinant(H);
}

TEST(Residue, MonomialTable) {
    EXPECT_EQ(res_monomial(Poly(1), {1, 1, 1}), 1);
    EXPECT_EQ(res_monomial(Poly(1), {2}), 0);
    EXPECT_EQ(res_monomial(R1.parse("x"), {2}), 1);
    EXPECT_EQ(res_monomial(R2.parse("3*x*y^2+x+5"), {2, 3}), 3);
    EXPECT_EQ(res_monomial(R2.parse("x^2*y"), {2, 2}), 0);
    EXPECT_THROW(res_monomial(Poly(1), {0}), IndexError);
    EXPECT_THROW(res_monomial(Poly(1), {1, -1}), IndexError);
    // linearity
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t) {
        Poly g = random_poly(rng, 2), h = random_poly(rng, 2);
        EXPECT_EQ(res_monomial(g + h, {2, 3}), res_monomial(g, {2, 3}) + res_monomial(h, {2, 3}));
    }
}

TEST(Residue, JacobianCovers) {
    auto c = jacobian_cover(R2.parse("x*y"), 2);
    EXPECT_EQ(c.exponents, (std::vector<int>{1, 1}));
    EXPECT_EQ(c.cofactors(0, 0), Poly());
    EXPECT_EQ(c.cofactors(0, 1), Poly(1));
    EXPECT_EQ(c.cofactors(1, 0), Poly(1));
    EXPECT_EQ(c.det, Poly(-1));
    auto c1 = jacobian_cover(R1.parse("x^2"), 1);
    EXPECT_EQ(c1.exponents, std::vector<int>{1});
    EXPECT_EQ(c1.cofactors(0, 0), Poly(Rational(1, 2)));
    auto c2 = jacobian_cover(R2.parse("x^2+y^3"), 2);
    EXPECT_EQ(c2.exponents, (std::vector<int>{1, 2}));
    EXPECT_EQ(c2.cofactors(0, 0), Poly(Rational(1, 2)));
    EXPECT_EQ(c2.cofactors(1, 1), Poly(Rational(1, 3)));
    EXPECT_EQ(c2.det, Poly(Rational(1, 6)));
}

TEST(Residue, Examples) {
    EXPECT_EQ(groth_residue({Poly(1), {R2.parse("y"), R2.parse("x")}}), -1);
    EXPECT_EQ(groth_residue({Poly(1), {R1.parse("2*x")}}), Rational(1, 2));
    EXPECT_EQ(groth_residue({R2.parse("y"), {R2.parse("2*x"), R2.parse("3*y^2")}}), Rational(1, 6));
    EXPECT_EQ(jacobian_residue(Poly(1), R2.parse("x*y"), 2), -1);
}

TEST(Residue, CoverIndependence) {
    Poly f = R2.parse("x^2+y^3");
    auto J = jacobian(f, 2);
    auto minimal = cover_with_exponents(J, {1, 2});
    auto wide = cover_with_exponents(J, {2, 2});
    auto wider = cover_with_exponents(J, {3, 4});
    EXPECT_NE(minimal.det, wide.det);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        Poly g = random_poly(rng, 2, 4, 5);
        Rational a = residue_with_cover(g, minimal);
        EXPECT_EQ(a, residue_with_cover(g, wide));
        EXPECT_EQ(a, residue_with_cover(g, wider));
    }
}

TEST(Residue, SeparableOracle) {
    std::mt19937_64 rng(3);
    std::vector<std::pair<Poly, Poly>> dens = {
        {R2.parse("2*x"), R2.parse("3*y^2")},
        {R2.parse("-x^2"), R2.parse("7*y^3")},
        {R2.parse("3*x^3"), R2.parse("y")},
    };
    for (const auto& [p, q] : dens)
        for (int t = 0; t < 20; ++t) {
            Poly g = random_poly(rng, 2, 5, 5);
            EXPECT_EQ(groth_residue({g, {p, q}}), separable_residue(g, p, q));
        }
}

TEST(Residue, LinearDenominators) {
    // Res[g dx/(Ax)] = g(0)/det A
    std::mt19937_64 rng(4);
    PolyMatrix A(2, 2);
    A(0, 0) = Poly(2), A(0, 1) = Poly(1), A(1, 0) = Poly(-1), A(1, 1) = Poly(3);
    std::vector<Poly> den = {R2.parse("2*x+y"), R2.parse("-x+3*y")};
    for (int t = 0; t < 10; ++t) {
        Poly g = random_poly(rng, 2);
        EXPECT_EQ(groth_residue({g, den}), g.constant_term() / determinant(A).constant_term());
    }
}

TEST(Residue, JacobianMultiplesVanish) {
    std::mt19937_64 rng(5);
    std::vector<std::pair<Poly, std::size_t>> fs = {
        {R2.parse("x*y"), 2},       {R2.parse("x^2+y^3"), 2},     {R2.parse("x^2+y^4"), 2},
        {R3.parse("x^2+y^2+z^2"), 3}, {R1.parse("x^5"), 1},         {R2.parse("x^3+y^5"), 2},
    };
    for (const auto& [f, n] : fs) {
        auto cv = jacobian_cover(f, n);
        for (int t = 0; t < 10; ++t)
            for (std::size_t i = 0; i < n; ++i) {
                Poly h = random_poly(rng, n, 3, 4);
                EXPECT_EQ(residue_with_cover(h * f.partial(i), cv), 0);
            }
    }
}

TEST(Residue, HessianGivesMilnorNumber) {
    std::vector<std::pair<Poly, std::size_t>> fs = {
        {R2.parse("x*y"), 2},         {R2.parse("x^2+y^3"), 2}, {R2.parse("x^2+y^4"), 2},
        {R3.parse("x^2+y^2+z^2"), 3}, {R1.parse("x^6"), 1},     {R2.parse("x^3+y^4"), 2},
    };
    for (const auto& [f, n] : fs) {
        std::size_t mu = check_isolated_singularity(f, n);
        EXPECT_EQ(jacobian_residue(hessian_det(f, n), f, n), Rational(static_cast<long>(mu)));
    }
}

TEST(Residue, MilnorPairingFullRank) {
    for (const auto& [f, n] : std::vector<std::pair<Poly, std::size_t>>{
             {R2.parse("x*y"), 2}, {R2.parse("x^2+y^3"), 2}, {R2.parse("x^3+y^4"), 2}, {R3.parse("x^2+y^2+z^2"), 3}}) {
        std::vector<Monomial> basis;
        auto M = milnor_pairing(f, n, &basis);
        EXPECT_EQ(rational_rank(M), basis.size());
        for (std::size_t i = 0; i < basis.size(); ++i)
            for (std::size_t j = 0; j < basis.size(); ++j) EXPECT_EQ(M(i, j), M(j, i));
    }
    Matrix<Rational> deg(2, 2);
    deg(0, 0) = 1, deg(0, 1) = 2, deg(1, 0) = 2, deg(1, 1) = 4;
    EXPECT_EQ(rational_rank(deg), 1u);
}

TEST(Residue, RejectsNonIsolated) {
    EXPECT_THROW(jacobian_cover(R2.parse("x^2*y"), 2), IsolatedSingularityError);
    EXPECT_THROW(groth_residue({Poly(1), {R2.parse("x"), R2.parse("x*y")}}), IsolatedSingularityError);
    EXPECT_THROW(groth_residue({Poly(1), {R2.parse("x-1"), R2.parse("y")}}), IsolatedSingularityError);
}

TEST(Residue, CechComponent) {
    CechFormSeries w;
    FormSeries s(2);
    s[0] = DiffForm::component(0b11, Poly::monomial(Monomial{-1, -1}, Rational(3)) + Poly::var(0, -2));
    s[1] = DiffForm::component(0b11, Poly::monomial(Monomial{-1, -1}, Rational(-1)));
    w.emplace(0b11, s);
    w.emplace(0b01, FormSeries(2, DiffForm::component(0b11, Poly::monomial(Monomial{-1, -1}))));
    auto r = cech_residue(w, 2, 2);
    EXPECT_EQ(r[0], 3);
    EXPECT_EQ(r[1], -1);
}

}  // namespace
