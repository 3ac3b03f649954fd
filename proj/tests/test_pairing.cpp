#include <gtest/gtest.h>

#include "mfhrr/corpus.hpp"

using namespace mfhrr;

namespace {

Ring R1({"x"}), R2({"x", "y"}), R3({"x", "y", "z"});

MatrixFactorization kz(const Ring& r, std::vector<const char*> a, std::vector<const char*> b) {
    std::vector<Poly> pa, pb;
    for (auto s : a) pa.push_back(r.parse(s));
    for (auto s : b) pb.push_back(r.parse(s));
    return koszul_mf(r, pa, pb);
}

io::json parse(const char* s) { return io::json::parse(s); }

PolyMatrix m11(const Poly& p) {
    PolyMatrix m(1, 1);
    m(0, 0) = p;
    return m;
}

TEST(Pairing, CalibrationSigns) {
    EXPECT_EQ(calibrate_sign(1), 1);
    EXPECT_EQ(calibrate_sign(3), 1);
    EXPECT_EQ(calibrate_sign(2), -1);
    EXPECT_EQ(calibrate_sign(6), -1);
    EXPECT_EQ(calibrate_sign(4), 1);
    for (std::size_t n = 1; n <= 8; ++n) {
        SignRecord s = sign_record(n);
        EXPECT_EQ(s.n, n);
        if (n % 2 == 0) EXPECT_EQ(s.epsilon, s.hrr_sign);
    }
    EXPECT_EQ(hrr_sign(1), -1);
    EXPECT_EQ(hrr_sign(3), 1);
    EXPECT_THROW(calibration_mf(3), IndexError);
}

TEST(Pairing, NodeValue) {
    auto P = kz(R2, {"x"}, {"y"});
    EXPECT_EQ(raw_pairing(P, P), -1);
    EXPECT_EQ(canonical_pairing_u0(P, P), 1);
    auto rep = hrr_check(P, P);
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.chi_ext, 1);
    EXPECT_EQ(rep.chi_residue, 1);
    EXPECT_EQ(rep.signs.n, 2u);
}

TEST(Pairing, OddVariableCountVanishes) {
    for (int d = 2; d <= 6; ++d)
        for (int a = 1; a < d; ++a) {
            Poly xa = Poly::var(0, a), xb = Poly::var(0, d - a);
            auto P = koszul_mf(R1, {xa}, {xb});
            auto Q = koszul_mf(R1, {xb}, {xa});
            EXPECT_EQ(canonical_pairing_u0(P, Q), 0);
            auto rep = hrr_check(P, Q);
            EXPECT_TRUE(rep.pass);
            EXPECT_EQ(rep.chi_ext, 0);
        }
    auto S = kz(R3, {"x", "y", "z"}, {"x", "y", "z"});
    EXPECT_EQ(canonical_pairing_u0(S, S), 0);
    EXPECT_TRUE(hrr_check(S, S).pass);
}

TEST(Pairing, Bilinearity) {
    auto P = kz(R2, {"x-y^2"}, {"x+y^2"});
    auto Q = kz(R2, {"x+y^2"}, {"x-y^2"});
    auto PP = direct_sum(P, Q);
    for (const auto& T : {P, Q, PP}) {
        EXPECT_EQ(canonical_pairing_u0(PP, T), canonical_pairing_u0(P, T) + canonical_pairing_u0(Q, T));
        EXPECT_EQ(canonical_pairing_u0(T, PP), canonical_pairing_u0(T, P) + canonical_pairing_u0(T, Q));
    }
}

TEST(Pairing, SymmetryAndShift) {
    std::vector<std::vector<MatrixFactorization>> families = {
        {kz(R2, {"x"}, {"y"}), kz(R2, {"y"}, {"x"})},
        {kz(R2, {"x-y^2"}, {"x+y^2"}), kz(R2, {"x+y^2"}, {"x-y^2"})},
        {kz(R2, {"x", "y"}, {"x", "y^3"}), kz(R2, {"x", "y^2"}, {"x", "y^2"})},
    };
    for (const auto& fam : families)
        for (const auto& P : fam)
            for (const auto& Q : fam) {
                EXPECT_EQ(canonical_pairing_u0(P, Q), canonical_pairing_u0(Q, P));
                EXPECT_EQ(canonical_pairing_u0(P, shift_mf(Q)), -canonical_pairing_u0(P, Q));
                EXPECT_EQ(canonical_pairing_u0(shift_mf(P), Q), -canonical_pairing_u0(P, Q));
                EXPECT_TRUE(hrr_check(P, Q).pass);
            }
}

TEST(Pairing, NonzeroChiBeyondTheNode) {
    auto B = kz(R2, {"x-y^2"}, {"x+y^2"});
    auto C = kz(R2, {"x+y^2"}, {"x-y^2"});
    EXPECT_EQ(euler_chi(B, B), 2);
    EXPECT_EQ(canonical_pairing_u0(B, B), 2);
    EXPECT_EQ(canonical_pairing_u0(B, C), -2);
    EXPECT_TRUE(hrr_check(B, C).pass);
}

TEST(Pairing, FourVariables) {
    Ring r({"x1", "x2", "x3", "x4"});
    auto E = kz(r, {"x1", "x3"}, {"x2", "x4"});
    auto F = kz(r, {"x1", "x4"}, {"x2", "x3"});
    auto a = hrr_check(E, E), b = hrr_check(E, F);
    EXPECT_TRUE(a.pass);
    EXPECT_TRUE(b.pass);
    EXPECT_EQ(a.chi_ext, 1);
    EXPECT_EQ(b.chi_ext, -1);
}

TEST(Pairing, CuspMatchesOracleValue) {
    auto K = kz(R2, {"x", "y"}, {"x", "y^2"});
    auto rep = hrr_check(K, K);
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.chi_ext, 0);
    EXPECT_EQ(rep.dim_ext0, 2u);
}

TEST(Pairing, Rejections) {
    auto P = kz(R2, {"x"}, {"y"});
    auto Q = kz(R2, {"x"}, {"y^2"});
    EXPECT_THROW(raw_pairing(P, Q), PotentialMismatch);
    auto N = mf_new(R2, R2.parse("x^2*y"), m11(R2.parse("x")), m11(R2.parse("x*y")));
    EXPECT_THROW(hrr_check(N, N), IsolatedSingularityError);
}

TEST(Tensor, ChiMultiplicative) {
    auto A = kz(R1, {"x"}, {"x"});
    auto B = kz(R2, {"x"}, {"y"});
    auto Bs = kz(R2, {"y"}, {"x"});
    auto t = tensor_chi(B, B, B, B);
    EXPECT_TRUE(t.consistent);
    EXPECT_EQ(t.chi_left, 1);
    EXPECT_EQ(std::labs(t.chi_tensor), 1);
    auto u = tensor_chi(B, Bs, B, Bs);
    EXPECT_TRUE(u.consistent);
    EXPECT_EQ(u.sign, t.sign);
    auto z = tensor_chi(A, A, B, B);
    EXPECT_TRUE(z.consistent);
    EXPECT_EQ(z.chi_tensor, 0);
}

TEST(Tensor, RenamesClashingVariables) {
    Ring r = concat_rings(R2, R2);
    EXPECT_EQ(r.names(), (std::vector<std::string>{"x", "y", "x_", "y_"}));
    auto P = kz(R2, {"x"}, {"y"});
    auto E = embed_mf(P, r, 2);
    EXPECT_EQ(r.format(E.f()), "x_*y_");
}

TEST(Corpus, DefaultCorpusPasses) {
    auto entries = load_corpus(MFHRR_CORPUS_PATH);
    ASSERT_GE(entries.size(), 8u);
    CorpusReport rep = run_corpus(entries);
    for (const auto& e : rep.entries) {
        EXPECT_TRUE(e.pass()) << e.name << (e.error ? ": " + e.error->dump() : "");
        EXPECT_FALSE(e.pairs.empty()) << e.name;
    }
    int s = 0;
    EXPECT_TRUE(rep.tensor_sign_constant(&s));
    EXPECT_NE(s, 0);
    EXPECT_TRUE(rep.pass());
    EXPECT_EQ(report_json(rep)["summary"]["pass"], true);
}

TEST(Corpus, EmptyCorpus) {
    CorpusReport rep = run_corpus(corpus_from_json(parse("[]")));
    EXPECT_TRUE(rep.pass());
    EXPECT_EQ(report_json(rep).dump(), R"({"entries":[],"summary":{"pass":true}})");
}

TEST(Corpus, NonIsolatedEntryRejected) {
    auto entries = corpus_from_json(parse(R"([
        {"name": "cusp-line", "vars": ["x", "y"], "f": "x^2*y",
         "mfs": [{"delta0": [["x"]], "delta1": [["x*y"]]}]},
        {"name": "node", "vars": ["x", "y"], "f": "x*y", "mfs": [{"koszul": {"a": ["x"], "b": ["y"]}}]}
    ])"));
    CorpusReport rep = run_corpus(entries);
    ASSERT_EQ(rep.entries.size(), 2u);
    ASSERT_TRUE(rep.entries[0].error.has_value());
    EXPECT_EQ((*rep.entries[0].error)["kind"], "isolated-singularity");
    EXPECT_TRUE(rep.entries[1].pass());
    EXPECT_FALSE(rep.pass());
    EXPECT_EQ(report_json(rep)["summary"]["failed"], 1);
}

TEST(Corpus, InputDiagnostics) {
    auto check = [](const char* text, const char* kind) {
        CorpusReport rep = run_corpus(corpus_from_json(parse(text)));
        ASSERT_EQ(rep.entries.size(), 1u);
        ASSERT_TRUE(rep.entries[0].error.has_value()) << text;
        EXPECT_EQ((*rep.entries[0].error)["kind"], kind) << text;
    };
    check(R"([{"vars": ["x", "y"], "f": "x*y", "mfs": [{"koszul": {"a": ["x"], "b": ["y^2"]}}]}])", "potential-mismatch");
    check(R"([{"vars": ["x", "y"], "f": "x*y", "mfs": [], "checks": ["nope"]}])", "input");
    check(R"([{"vars": ["x", "y"], "f": "x*y"}])", "input");
    check(R"([{"vars": ["x", "y"], "f": "x*y", "mfs": [{"delta0": [["x"]], "delta1": [["x"]]}]}])", "factorization");
    EXPECT_THROW(corpus_from_json(parse("{}")), InputError);
}

TEST(Corpus, Deterministic) {
    auto entries = load_corpus(MFHRR_CORPUS_PATH);
    RunOptions opt;
    std::string a = report_json(run_corpus(entries, opt)).dump();
    std::string b = report_json(run_corpus(entries, opt)).dump();
    EXPECT_EQ(a, b);
}

TEST(Corpus, TextTable) {
    auto entries = corpus_from_json(parse(R"([
        {"name": "node", "vars": ["x", "y"], "f": "x*y", "mfs": [{"koszul": {"a": ["x"], "b": ["y"]}}]}
    ])"));
    std::string t = report_text(run_corpus(entries));
    EXPECT_NE(t.find("entry      | χ_ext | χ_res | pass"), std::string::npos) << t;
    EXPECT_NE(t.find("node (0,0) |     1 |     1 |  yes"), std::string::npos) << t;
    EXPECT_NE(t.find("summary: pass"), std::string::npos) << t;
}

}  // namespace
