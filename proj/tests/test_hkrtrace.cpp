#include <gtest/gtest.h>

#include <random>

#include "linalg.hpp"
#include "mfhrr/hkr.hpp"
#include "mfhrr/residue.hpp"
#include "mfhrr/suites.hpp"
#include "support.hpp"

using namespace mfhrr;
using testing_support::random_form;

namespace {

const Atom id = EndAlgebra::identity();

MatrixFactorization mf_xy() {
    Ring r({"x", "y"});
    PolyMatrix d0(1, 1), d1(1, 1);
    d0(0, 0) = r.parse("x");
    d1(0, 0) = r.parse("y");
    return mf_new(r, r.parse("x*y"), d0, d1);
}

FormMask top(std::size_t n) { return static_cast<FormMask>((FormMask{1} << n) - 1); }

// Bernoulli numbers B_0..B_n with B_1 = −1/2 (Akiyama–Tanigawa, then sign fix).
std::vector<Rational> bernoulli(std::size_t n) {
    std::vector<Rational> out, a(n + 1);
    for (std::size_t m = 0; m <= n; ++m) {
        a[m] = Rational(1, static_cast<long>(m + 1));
        for (std::size_t j = m; j >= 1; --j) a[j - 1] = Rational(static_cast<long>(j)) * (a[j - 1] - a[j]);
        out.push_back(a[0]);
    }
    if (n >= 1) out[1] = -out[1];
    return out;
}

Rational fact(std::size_t n) {
    Rational r = 1;
    for (std::size_t k = 2; k <= n; ++k) r *= Rational(static_cast<long>(k));
    return r;
}

// Block-diagonal sum of two form matrices, even indices first.
GradedMatrixForm block_sum(const GradedMatrixForm& a, const GradedMatrixForm& b) {
    std::size_t a0 = a.rank0(), b0 = b.rank0();
    GradedMatrixForm s(a0 + b0, a.rank1() + b.rank1());
    auto ia = [&](std::size_t i) { return i < a0 ? i : i + b0; };
    auto ib = [&](std::size_t i) { return i < b0 ? a0 + i : a.size() + i; };
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) s(ia(i), ia(j)) = a(i, j);
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) s(ib(i), ib(j)) = b(i, j);
    return s;
}

// Even form matrix with entries of positive form degree in n variables.
GradedMatrixForm random_even_nilpotent(std::mt19937_64& rng, std::size_t r0, std::size_t r1, std::size_t n) {
    GradedMatrixForm m(r0, r1);
    std::uniform_int_distribution<int> c(-2, 2);
    for (std::size_t i = 0; i < r0 + r1; ++i)
        for (std::size_t j = 0; j < r0 + r1; ++j) {
            int par = (m.parity(i) + m.parity(j)) % 2;
            DiffForm w;
            for (FormMask s = 1; s <= top(n); ++s)
                if (popcount(s) % 2 == par && popcount(s) <= 2) w.add(s, Poly(Rational(c(rng))));
            m(i, j) = w;
        }
    return m;
}

TEST(Trace, LemmaValues) {
    LemmaAlgebra L;
    const EndAlgebra& A = L.alg;
    EXPECT_EQ(tr_nabla(A, single(A, {L.e})), -DiffForm::dx(0));
    EXPECT_TRUE(tr_nabla(A, single(A, {id})).is_zero());
    for (std::size_t j = 0; j <= 4; ++j) EXPECT_TRUE(tr_nabla(A, y_power(j, L)).is_zero()) << j;
}

TEST(Trace, ChainMapSquare) {
    auto r = suites::trace_chain_map(suites::koszul_square(), 100, 11);
    EXPECT_TRUE(r.pass()) << r.first_failure;
}

TEST(Trace, ChainMapXY) {
    auto r = suites::trace_chain_map(suites::koszul_xy(), 100, 12);
    EXPECT_TRUE(r.pass()) << r.first_failure;
}

TEST(Trace, ChainMapQuasiHomogeneous) {
    Ring R({"x", "y"});
    auto P = koszul_mf(R, {R.parse("x"), R.parse("y^2")}, {R.parse("x"), R.parse("y")});
    auto r = suites::trace_chain_map(P, 40, 13);
    EXPECT_TRUE(r.pass()) << r.first_failure;
}

TEST(Trace, RejectsCechWords) {
    LemmaAlgebra L;
    Chain c = cech_alpha(single(L.alg, {L.e}), 1);
    EXPECT_THROW(tr_nabla(L.alg, c), ShapeMismatch);
}

TEST(Trace, AgreesWithSegalHKR) {
    std::mt19937_64 rng(3);
    for (const auto& P : {suites::koszul_square(), suites::koszul_xy()}) {
        EndAlgebra A = EndAlgebra::of(P, Normalization::Scalar);
        Chain one = single(A, {id});
        EXPECT_EQ(hkr_segal(A, one), tr_nabla(A, one));
        for (int t = 0; t < 20; ++t) {
            Chain c = suites::random_chain(A, rng);
            EXPECT_EQ(hkr_segal(A, c), tr_nabla(A, c));
        }
    }
}

TEST(Trace, ResidueOfEta) {
    LemmaAlgebra L;
    for (std::size_t j = 0; j <= 4; ++j) {
        ChainSeries eta = eta_construct(j, 4, L);
        CechFormSeries t = tr_nabla_cech(L.alg, eta);
        std::vector<Rational> r = cech_residue(t, 1, 4);
        EXPECT_EQ(r[0], Rational(j == 0 ? -1 : 0)) << j;
        for (std::size_t k = 1; k < r.size(); ++k) EXPECT_EQ(r[k], 0) << j << " u^" << k;
        // only the α-tagged part carries a pole
        EXPECT_EQ(r[0], -trace_augmentation(y_power(j, L)));
    }
}

TEST(Chern, KoszulXY) {
    ChernForm c = chern_form(mf_xy());
    EXPECT_TRUE(c.degree_part(0).is_zero());
    EXPECT_TRUE(c.degree_part(1).is_zero());
    EXPECT_EQ(c.degree_part(2), DiffForm::component(top(2), Poly(1)));
    EXPECT_EQ(c.top_coefficient(), Poly(1));
    for (std::size_t k = 1; k < c.series.truncation(); ++k) EXPECT_TRUE(c.series[k].is_zero());
    // the Koszul presentation has δ0 and δ1 exchanged
    Ring r({"x", "y"});
    EXPECT_EQ(chern_form(koszul_mf(r, {r.parse("x")}, {r.parse("y")})).top_coefficient(), Poly(-1));
}

TEST(Chern, OneVariableVanishes) {
    Ring r({"x"});
    for (int d = 2; d <= 6; ++d)
        for (int a = 1; a < d; ++a) {
            auto P = koszul_mf(r, {Poly::var(0, a)}, {Poly::var(0, d - a)});
            EXPECT_TRUE(chern_form(P).series.is_zero()) << d << " " << a;
        }
}

TEST(Chern, OddDegreesVanish) {
    Ring r({"x", "y", "z"});
    std::vector<MatrixFactorization> ps = {
        koszul_mf(r, {r.parse("x"), r.parse("y")}, {r.parse("x"), r.parse("y^2")}),
        koszul_mf(r, {r.parse("x+y"), r.parse("y^2"), r.parse("z")}, {r.parse("x"), r.parse("x+z"), r.parse("y*z")}),
        koszul_mf(r, {r.parse("x^2"), r.parse("y")}, {r.parse("y"), r.parse("x*z")}),
    };
    for (const auto& P : ps) {
        ChernForm c = chern_form(P);
        for (int k = 1; k <= 3; k += 2) EXPECT_TRUE(c.degree_part(k).is_zero());
    }
}

TEST(Chern, DirectSumAdditive) {
    Ring r({"x", "y"});
    auto P = koszul_mf(r, {r.parse("x")}, {r.parse("x+y^3")});
    auto A = koszul_mf(r, {r.parse("x"), r.parse("y")}, {r.parse("y"), r.parse("x")});
    auto B = koszul_mf(r, {r.parse("x+y"), r.parse("y")}, {r.parse("y"), r.parse("x-y")});
    ASSERT_EQ(A.f(), B.f());
    EXPECT_EQ(chern_form(direct_sum(P, P)).series, chern_form(P).series.scaled(2));
    EXPECT_EQ(chern_form(direct_sum(A, B)).series, chern_form(A).series + chern_form(B).series);
}

TEST(Chern, ShiftNegates) {
    auto P = mf_xy();
    EXPECT_EQ(chern_form(shift_mf(P)).series, -chern_form(P).series);
}

TEST(Gamma, Values) {
    FormSeries w(3, DiffForm::dx(0));
    EXPECT_EQ(gamma_twist(w)[0], -DiffForm::dx(0));
    std::mt19937_64 rng(9);
    for (int t = 0; t < 20; ++t) {
        FormSeries s(3);
        for (std::size_t k = 0; k < 3; ++k) s[k] = random_form(rng, 2);
        EXPECT_EQ(gamma_twist(gamma_twist(s)), s);
    }
}

TEST(Gamma, IntertwinesTwists) {
    std::mt19937_64 rng(10);
    Ring r({"x", "y"});
    for (const char* fs : {"x^2", "x*y", "x^2+y^3"}) {
        Poly f = r.parse(fs);
        for (int t = 0; t < 20; ++t) {
            FormSeries s(4);
            for (std::size_t k = 0; k < 4; ++k) s[k] = random_form(rng, 2);
            EXPECT_EQ(gamma_twist(s.twist_diff(-f, 2, -1)), gamma_twist(s).twist_diff(f, 2, -1)) << fs;
        }
    }
}

TEST(Todd, GeneratingSeriesMatchesBernoulli) {
    auto B = bernoulli(12);
    auto c = todd_generating_series(12);
    for (std::size_t k = 0; k <= 12; ++k) EXPECT_EQ(c[k], B[k] / fact(k)) << k;
}

TEST(Todd, ZeroCurvature) {
    GradedMatrixForm R(2, 1);
    EXPECT_EQ(todd_sdet(R, 3), FormSeries(FormSeries::kDefaultTruncation, DiffForm(Poly(1))));
}

TEST(Todd, EvenBlock) {
    // r = dx1dx2 + dx3dx4, r² = 2 dx1dx2dx3dx4, r³ = 0
    DiffForm r = DiffForm::component(0b0011, Poly(1)) + DiffForm::component(0b1100, Poly(1));
    GradedMatrixForm R(1, 0);
    R(0, 0) = r;
    auto B = bernoulli(3);
    DiffForm expect = DiffForm(Poly(1)) + r.scaled(B[1]) + wedge(r, r).scaled(B[2] / fact(2));
    EXPECT_EQ(todd_sdet(R, 4)[0], expect);
    EXPECT_EQ(B[1], Rational(-1, 2));
}

TEST(Todd, OddBlockInverts) {
    DiffForm r = DiffForm::component(0b0011, Poly(1)) + DiffForm::component(0b1100, Poly(1));
    GradedMatrixForm E(1, 0), O(0, 1);
    E(0, 0) = r;
    O(0, 0) = r;
    DiffForm te = todd_sdet(E, 4)[0], to = todd_sdet(O, 4)[0];
    EXPECT_EQ(wedge(te, to), DiffForm(Poly(1)));
}

TEST(Todd, BlockMultiplicative) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 10; ++t) {
        GradedMatrixForm a = random_even_nilpotent(rng, 1, 1, 4), b = random_even_nilpotent(rng, 1, 1, 4);
        DiffForm lhs = todd_sdet(block_sum(a, b), 4)[0];
        DiffForm rhs = wedge(todd_sdet(a, 4)[0], todd_sdet(b, 4)[0]);
        EXPECT_EQ(lhs, rhs);
    }
}

TEST(Todd, RejectsNonNilpotent) {
    GradedMatrixForm R(1, 0);
    R(0, 0) = DiffForm(Poly(1));
    EXPECT_THROW(todd_sdet(R, 2), NonNilpotent);
    GradedMatrixForm S(1, 1);
    S(0, 1) = DiffForm(Poly(1));
    EXPECT_THROW(todd_sdet(S, 2), ParityError);
}

}  // namespace
