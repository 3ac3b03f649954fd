#include <gtest/gtest.h>

#include <random>

#include "mfhrr/hochschild.hpp"
#include "mfhrr/suites.hpp"

using namespace mfhrr;

namespace {

LemmaAlgebra L;
const Atom& e = L.e;
const Atom& es = L.estar;
const Atom id = EndAlgebra::identity();

Chain w(std::vector<Atom> atoms, const Poly& c = Poly(1)) { return single(L.alg, atoms, c); }

// Exterior algebra Λ on e* with zero differential, as End of a rank 1|1
// module with δ = 0.
EndAlgebra exterior() {
    PolyMatrix d(2, 2);
    return EndAlgebra(1, 1, d, Normalization::Scalar, 1);
}

TEST(Hochschild, ExteriorCycle) {
    EndAlgebra A = exterior();
    EXPECT_TRUE(b_op(A, single(A, {id, A.unit(0, 1)})).is_zero());
    EXPECT_TRUE(b_op(A, single(A, {id, A.unit(0, 1), A.unit(0, 1)})).is_zero());
}

TEST(Hochschild, KoszulDifferentialValues) {
    const EndAlgebra& A = L.alg;
    Chain expect = w({id, es}, Poly::var(0)) - w({id});
    EXPECT_EQ(b_op(A, w({e, es})), expect);
    EXPECT_EQ(b_op(A, w({es, e, e})), -w({id, e}));
}

TEST(Hochschild, ConnesValues) {
    const EndAlgebra& A = L.alg;
    EXPECT_EQ(B_op(A, w({e})), w({id, e}));
    EXPECT_EQ(B_op(A, w({es})), w({id, es}));
    EXPECT_TRUE(B_op(A, w({id, e})).is_zero());
    EXPECT_EQ(B_op(A, w({es, e})), w({id, es, e}) + w({id, e, es}));
}

TEST(Hochschild, Normalization) {
    EndAlgebra S = EndAlgebra::of(suites::koszul_square(), Normalization::Scalar);
    EndAlgebra M = EndAlgebra::of(suites::koszul_square(), Normalization::Module);
    Atom xid{0, 0, Monomial::var(0)};
    EXPECT_FALSE(single(S, {id, xid}).is_zero());
    EXPECT_TRUE(single(S, {id, id}).is_zero());
    EXPECT_TRUE(single(M, {id, id}, Poly::var(0)).is_zero());
    EXPECT_THROW(S.unit(0, 0), IndexError);
}

TEST(Hochschild, DecomposeRoundTrip) {
    EndAlgebra A = EndAlgebra::of(suites::koszul_xy(), Normalization::Scalar);
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        PolyMatrix m(4, 4);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                if ((rng() & 3) == 0) m(i, j) = Poly(static_cast<long>(rng() % 5) - 2) + Poly::var(rng() % 2);
        PolyMatrix back(4, 4);
        for (const auto& [a, c] : A.decompose(m)) back = back + c * A.matrix(a);
        EXPECT_EQ(back, m);
    }
}

TEST(Hochschild, AtomProductsMatchMatrices) {
    EndAlgebra A = EndAlgebra::of(suites::koszul_xy(), Normalization::Scalar);
    std::mt19937_64 rng(9);
    for (int t = 0; t < 50; ++t) {
        Atom a = suites::random_atom(A, rng, false, 1), b = suites::random_atom(A, rng, false, 1);
        PolyMatrix prod(4, 4), diff(4, 4);
        for (const auto& [c, k] : A.multiply(a, b)) prod = prod + k * A.matrix(c);
        EXPECT_EQ(prod, A.matrix(a) * A.matrix(b));
        for (const auto& [c, k] : A.differential(a)) diff = diff + k * A.matrix(c);
        PolyMatrix expect = A.delta() * A.matrix(a);
        PolyMatrix right = A.matrix(a) * A.delta();
        expect = A.parity(a) ? expect + right : expect - right;
        EXPECT_EQ(diff, expect);
    }
}

TEST(Hochschild, MixedComplexScalar) {
    for (auto P : {suites::koszul_square(), suites::koszul_xy()}) {
        auto r = suites::mixed_complex(EndAlgebra::of(P, Normalization::Scalar), 100, 11);
        EXPECT_TRUE(r.pass()) << r.first_failure;
    }
}

TEST(Hochschild, MixedComplexModule) {
    for (auto P : {suites::koszul_square(), suites::koszul_xy()}) {
        auto r = suites::mixed_complex(EndAlgebra::of(P, Normalization::Module), 60, 12);
        EXPECT_TRUE(r.pass()) << r.first_failure;
    }
}

TEST(Hochschild, CurvedSquareZero) {
    // b² = 0 for a curved algebra with noncentral curvature W = δ²
    Ring R({"x", "y"});
    PolyMatrix d = koszul_mf(R, {Poly::var(0), Poly::var(1)}, {Poly::var(1), Poly::var(0)}).delta();
    d(0, 2) = d(0, 2) + Poly::var(1) * Poly::var(1);
    EndAlgebra C = EndAlgebra::curved(2, 2, d, Normalization::Scalar, 2);
    EXPECT_FALSE(C.curvature()->is_zero());
    std::mt19937_64 rng(2);
    suites::ChainSampler s;
    s.max_len = 3;
    for (int t = 0; t < 40; ++t) {
        Chain c = suites::random_chain(C, rng, s);
        EXPECT_TRUE(b_op(C, b_op(C, c)).is_zero());
    }
}

TEST(Hochschild, ParityChecked) {
    PolyMatrix d(2, 2);
    d(0, 0) = Poly::var(0);
    EXPECT_THROW(EndAlgebra(1, 1, d, Normalization::Scalar, 1), ParityError);
}

class ShuffleTest : public ::testing::Test {
protected:
    Ring R{std::vector<std::string>{"x", "y"}};
    MatrixFactorization P = koszul_mf(R, {Poly::var(0)}, {Poly::var(0)});
    MatrixFactorization Q = koszul_mf(R, {Poly::var(1)}, {Poly::var(1) * Poly::var(1)});
    TensorAlgebra T{P, Q, Normalization::Scalar};
};

TEST_F(ShuffleTest, EmptyAndSingle) {
    const EndAlgebra &A = T.left(), &C = T.right();
    Atom a0 = A.unit(1, 0), a1 = A.unit(0, 1), b0 = C.unit(1, 0);
    Chain x0 = single(A, {a0}), y0 = single(C, {b0});
    // sh(a0[] ⊗ b0[]) = (a0 ⊗ b0)[]
    Chain expect;
    expand_into(T.product(), expect, 0, std::vector<LinComb>{T.product_a0(Word{0, {a0}}, Word{0, {b0}})}, Poly(1));
    EXPECT_EQ(T.sh(x0, y0), expect);
    // sh(a0[a1] ⊗ b0[]) = (−1)^{|b0||sa1|}(a0⊗b0)[a1⊗1]; |sa1| = 0 here
    Chain x1 = single(A, {a0, a1});
    Chain e1;
    expand_into(T.product(), e1, 0,
                std::vector<LinComb>{T.product_a0(Word{0, {a0}}, Word{0, {b0}}), T.embed_left(a1)}, Poly(1));
    EXPECT_EQ(T.sh(x1, y0), e1);
    // even a1 with odd b0: sign −1
    Atom a2 = A.unit(1, 1);
    Chain x2 = single(A, {a0, a2});
    Chain e2;
    expand_into(T.product(), e2, 0,
                std::vector<LinComb>{T.product_a0(Word{0, {a0}}, Word{0, {b0}}), T.embed_left(a2)}, Poly(-1));
    EXPECT_EQ(T.sh(x2, y0), e2);
}

TEST_F(ShuffleTest, TwoTermShuffle) {
    const EndAlgebra &A = T.left(), &C = T.right();
    Atom a1 = A.unit(1, 1), b1 = C.unit(1, 1);  // even entries, odd shifts
    Chain x = single(A, {id, a1}), y = single(C, {id, b1});
    Chain expect;
    LinComb one{{id, Poly(1)}};
    expand_into(T.product(), expect, 0, std::vector<LinComb>{one, T.embed_left(a1), T.embed_right(b1)}, Poly(1));
    expand_into(T.product(), expect, 0, std::vector<LinComb>{one, T.embed_right(b1), T.embed_left(a1)}, Poly(-1));
    EXPECT_EQ(T.sh(x, y), expect);
}

TEST_F(ShuffleTest, CyclicShuffleZeroLength) {
    const EndAlgebra &A = T.left(), &C = T.right();
    Atom a0 = A.unit(1, 1), b0 = C.unit(1, 0);
    Chain x = single(A, {a0}), y = single(C, {b0});
    LinComb one{{id, Poly(1)}};
    Chain first;
    expand_into(T.product(), first, 0, std::vector<LinComb>{one, T.embed_left(a0), T.embed_right(b0)}, Poly(1));
    Chain second;
    expand_into(T.product(), second, 0, std::vector<LinComb>{one, T.embed_right(b0), T.embed_left(a0)}, Poly(1));
    EXPECT_EQ(T.Sh(x, y), first);
    // |s a0| = 1, |s b0| = 0: the swapped arrangement carries sign +1
    EXPECT_EQ(T.Sh(x, y, CyclicShuffleSet::All), first + second);
}

TEST_F(ShuffleTest, DifferentialCompatibility) {
    auto r = suites::shuffle_b(T, 60, 21);
    EXPECT_TRUE(r.pass()) << r.first_failure;
}

TEST_F(ShuffleTest, MixedCompatibility) {
    auto r = suites::shuffle_mixed(T, 40, 22, 4);
    EXPECT_TRUE(r.pass()) << r.first_failure;
}

TEST_F(ShuffleTest, LodayIdentity) {
    auto r = suites::shuffle_loday(T, 40, 23);
    EXPECT_TRUE(r.pass()) << r.first_failure;
}

TEST_F(ShuffleTest, AllCyclicShufflesBreakCompatibility) {
    // Without the a'_0-before-a''_0 restriction the u^1 identity fails.
    const EndAlgebra &A = T.left(), &C = T.right(), &E = T.product();
    Chain x = single(A, {A.unit(1, 0)}), y = single(C, {C.unit(0, 1)});
    auto all = CyclicShuffleSet::All;
    Chain lhs = B_op(E, T.sh(x, y)) + b_op(E, T.Sh(x, y, all));
    Chain rhs = T.sh(B_op(A, x), y) - T.sh(x, B_op(C, y)) + T.Sh(b_op(A, x), y, all) - T.Sh(x, b_op(C, y), all);
    Chain lhs2 = B_op(E, T.sh(x, y)) + b_op(E, T.Sh(x, y));
    Chain rhs2 = T.sh(B_op(A, x), y) - T.sh(x, B_op(C, y)) + T.Sh(b_op(A, x), y) - T.Sh(x, b_op(C, y));
    EXPECT_EQ(lhs2, rhs2);
    EXPECT_NE(lhs, rhs);
}

TEST(Psi, SmallLengths) {
    auto P = suites::koszul_square();
    EndAlgebra A = EndAlgebra::of(P, Normalization::Scalar), D = EndAlgebra::of(dual_mf(P), Normalization::Scalar);
    Atom a0 = A.unit(1, 1), a1{0, 0, Monomial::var(0)};
    EXPECT_EQ(psi_op(A, D, single(A, {a0})), single(D, {a0}));
    EXPECT_EQ(psi_op(A, D, single(A, {a0, a1})), -single(D, {a0, a1}));
    // odd atom E_10 maps to the sign-twisted transpose E_01
    EXPECT_EQ(psi_op(A, D, single(A, {A.unit(1, 0)})), single(D, {A.unit(0, 1)}));
    EXPECT_EQ(psi_op(A, D, single(A, {A.unit(0, 1)})), -single(D, {A.unit(1, 0)}));
}

TEST(Psi, ChainMapAndInvolution) {
    for (auto P : {suites::koszul_square(), suites::koszul_xy()})
        for (auto mode : {Normalization::Scalar, Normalization::Module}) {
            suites::ChainSampler s;
            s.max_len = 3;
            auto r = suites::psi_chain_map(P, mode, 30, 31, 3, s);
            EXPECT_TRUE(r.pass()) << r.first_failure;
        }
}

TEST(Psi, AnticommutesWithB) {
    auto P = suites::koszul_square();
    EndAlgebra A = EndAlgebra::of(P, Normalization::Scalar), D = EndAlgebra::of(dual_mf(P), Normalization::Scalar);
    Chain c = single(A, {A.unit(1, 0), A.unit(0, 1)});
    EXPECT_EQ(psi_op(A, D, B_op(A, c)), -B_op(D, psi_op(A, D, c)));
    EXPECT_FALSE(B_op(A, c).is_zero());
}

TEST(Lemma, BaseCase) {
    auto ph = phi_construct(0, 2);
    EXPECT_EQ(ph.phi[0], w({e}));
    EXPECT_EQ(ph.phi[1], w({es, e, e}));
    EXPECT_EQ(b_op(L.alg, -w({es, e, e})), B_op(L.alg, w({e})));
    EXPECT_EQ(B_op(L.alg, w({e})), w({id, e}));
}

TEST(Lemma, AgreesWithShuffleScheme) {
    const EndAlgebra& A = L.alg;
    Chain seed = w({es, e, e});
    for (std::size_t j = 0; j <= 3; ++j) {
        auto ph = phi_construct(j, 3);
        Chain phi1 = L.word(id, j, Poly(-1));
        if (j > 0) {
            EXPECT_EQ(phi1, B_op(A, L.word(es, j - 1)).scaled(Poly(Rational(-1, long(j))))) << j;
        }
        Chain phi2 = B_op(A, sh_internal(A, w({es, e}, Poly(Rational(-1, 3))), phi1));
        EXPECT_EQ(ph.phi[1], -sh_internal(A, seed, phi1)) << j;
        EXPECT_EQ(ph.phi[2], sh_internal(A, seed, phi2)) << j;
    }
}

TEST(Lemma, ZetaIdentities) {
    const EndAlgebra& A = L.alg;
    Chain zeta = -(w({es, es, e, e, e}) + w({es, e, es, e, e}) + w({es, e, e, es, e}) + w({es, e, e, e, es}));
    EXPECT_EQ(B_op(A, w({es, e, e})), b_op(A, zeta));
    Chain q = w({id, es, e}) + w({id, e, es});
    EXPECT_EQ(zeta.scaled(Poly(-3)), sh_internal(A, w({es, e, e}), q));
    EXPECT_EQ(B_op(A, w({es, e})), q);
    EXPECT_TRUE(b_op(A, q).is_zero());
}

TEST(Lemma, PhiVerifies) {
    for (std::size_t j = 0; j <= 4; ++j)
        for (std::size_t U = 1; U <= 8; ++U) EXPECT_NO_THROW(phi_construct(j, U)) << j << " " << U;
}

TEST(Lemma, EtaClosed) {
    auto r = suites::lemma_construction(4, 6);
    EXPECT_TRUE(r.pass()) << r.first_failure;
}

TEST(Lemma, EtaZeroShape) {
    ChainSeries eta = eta_construct(0, 2);
    Chain expect = w({id});
    expect += cech_alpha(w({e}, Poly::var(0, -1)), 1);
    EXPECT_EQ(eta[0], expect);
}

TEST(Lemma, TraceOfPowers) {
    for (std::size_t j = 0; j <= 4; ++j) EXPECT_EQ(trace_augmentation(y_power(j)), Rational(j == 0 ? 1 : 0));
}

TEST(Cech, AlphaSquareZero) {
    Chain c = w({e, es});
    EXPECT_TRUE(cech_alpha(cech_alpha(c, 2), 2).is_zero());
    EXPECT_FALSE(cech_alpha(c, 2).is_zero());
    // b anticommutes with α
    EXPECT_EQ(b_op(L.alg, cech_alpha(c, 1)), -cech_alpha(b_op(L.alg, c), 1));
}

}  // namespace
