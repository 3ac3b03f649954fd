#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <future>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "mfhrr/hkr.hpp"
#include "mfhrr/hochschild.hpp"
#include "mfhrr/mf.hpp"

namespace mfhrr::suites {

struct SuiteResult {
    std::string name;
    std::size_t samples = 0;
    std::size_t failures = 0;
    std::string first_failure;
    double seconds = 0;

    bool pass() const { return samples > 0 && failures == 0; }
};

struct ChainSampler {
    std::size_t max_len = 4;    // bar length n ≤ max_len
    std::size_t max_words = 3;  // words per chain
    int max_mono_deg = 1;       // monomial degree on atoms (scalar mode)
    int coef = 3;
};

inline Atom random_atom(const EndAlgebra& A, std::mt19937_64& rng, bool bar, int max_mono_deg) {
    std::uniform_int_distribution<std::size_t> pick(0, A.size() * A.size() - 1);
    std::uniform_int_distribution<int> deg(0, max_mono_deg);
    std::uniform_int_distribution<std::size_t> var(0, A.nvars() - 1);
    for (;;) {
        std::size_t q = pick(rng);
        Atom a{static_cast<uint8_t>(q / A.size()), static_cast<uint8_t>(q % A.size()), {}};
        if (A.mode() == Normalization::Scalar && A.nvars() > 0) {
            int d = deg(rng);
            for (int t = 0; t < d; ++t) ++a.mon.e[var(rng)];
        }
        if (bar && A.degenerate(a)) continue;
        return a;
    }
}

inline Word random_word(const EndAlgebra& A, std::mt19937_64& rng, std::size_t len, int max_mono_deg) {
    Word w;
    w.a.push_back(random_atom(A, rng, false, max_mono_deg));
    for (std::size_t k = 0; k < len; ++k) w.a.push_back(random_atom(A, rng, true, max_mono_deg));
    return w;
}

inline Poly random_coefficient(const EndAlgebra& A, std::mt19937_64& rng, int coef) {
    std::uniform_int_distribution<int> c(-coef, coef);
    int v = 0;
    while (v == 0) v = c(rng);
    if (A.mode() == Normalization::Scalar || A.nvars() == 0) return Poly(v);
    std::uniform_int_distribution<std::size_t> var(0, A.nvars() - 1);
    std::uniform_int_distribution<int> coin(0, 1);
    Poly p(v);
    if (coin(rng)) p += Poly::var(var(rng)).scaled(Rational(c(rng)));
    return p;
}

inline Chain random_chain(const EndAlgebra& A, std::mt19937_64& rng, const ChainSampler& s = {}) {
    std::uniform_int_distribution<std::size_t> nwords(1, s.max_words), len(0, s.max_len);
    Chain c;
    std::size_t k = nwords(rng);
    for (std::size_t t = 0; t < k; ++t)
        A.add(c, random_word(A, rng, len(rng), s.max_mono_deg), random_coefficient(A, rng, s.coef));
    return c;
}

// Single-word chain of the given length (homogeneous).
inline Chain random_monomial_chain(const EndAlgebra& A, std::mt19937_64& rng, std::size_t len,
                                   const ChainSampler& s = {}) {
    Chain c;
    while (c.is_zero()) A.add(c, random_word(A, rng, len, s.max_mono_deg), random_coefficient(A, rng, s.coef));
    return c;
}

namespace detail {

// Evaluates `check(i)` for i < n across worker threads; returns failures in
// index order so that reports do not depend on scheduling.
inline std::vector<std::string> run_parallel(std::size_t n, const std::function<std::string(std::size_t)>& check) {
    std::vector<std::string> out(n);
    std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), 8));
    std::vector<std::future<void>> fs;
    for (std::size_t wkr = 0; wkr < workers; ++wkr)
        fs.push_back(std::async(std::launch::async, [&, wkr] {
            for (std::size_t i = wkr; i < n; i += workers) out[i] = check(i);
        }));
    for (auto& f : fs) f.get();
    return out;
}

inline void collect(SuiteResult& r, const std::vector<std::string>& msgs) {
    r.samples = msgs.size();
    for (std::size_t i = 0; i < msgs.size(); ++i)
        if (!msgs[i].empty()) {
            if (r.failures == 0) r.first_failure = "sample " + std::to_string(i) + ": " + msgs[i];
            ++r.failures;
        }
}

template <class F>
SuiteResult timed(const std::string& name, F&& body) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteResult r;
    r.name = name;
    body(r);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline std::vector<Chain> words_of(const Chain& c) {
    std::vector<Chain> r;
    for (const auto& [w, k] : c.terms()) {
        Chain t;
        t.add_raw(w, k);
        r.push_back(t);
    }
    return r;
}

}  // namespace detail

// Endomorphism algebras ℰ_f of Koszul factorizations used by the suites.
inline MatrixFactorization koszul_square() {
    Ring r({"x"});
    return koszul_mf(r, {Poly::var(0)}, {Poly::var(0)});
}
inline MatrixFactorization koszul_xy() {
    Ring r({"x", "y"});
    return koszul_mf(r, {Poly::var(0), Poly::var(1)}, {Poly::var(1), Poly(0)});
}

// b² = 0, B² = 0, bB + Bb = 0.
inline SuiteResult mixed_complex(const EndAlgebra& A, std::size_t samples, uint64_t seed,
                                 const ChainSampler& s = {}) {
    return detail::timed("mixed-complex", [&](SuiteResult& r) {
        std::mt19937_64 rng(seed);
        std::vector<Chain> xs;
        for (std::size_t i = 0; i < samples; ++i) xs.push_back(random_chain(A, rng, s));
        detail::collect(r, detail::run_parallel(samples, [&](std::size_t i) -> std::string {
            const Chain& c = xs[i];
            Chain bc = b_op(A, c), Bc = B_op(A, c);
            if (!b_op(A, bc).is_zero()) return "b^2 != 0";
            if (!B_op(A, Bc).is_zero()) return "B^2 != 0";
            if (!(b_op(A, Bc) + B_op(A, bc)).is_zero()) return "bB + Bb != 0";
            return {};
        }));
    });
}

struct ShufflePair {
    Chain x, y;
    int deg_x = 0;
};

inline std::vector<ShufflePair> shuffle_pairs(const TensorAlgebra& T, std::size_t samples, uint64_t seed,
                                              std::size_t max_total) {
    std::mt19937_64 rng(seed);
    std::vector<ShufflePair> ps;
    std::uniform_int_distribution<std::size_t> len(0, max_total);
    while (ps.size() < samples) {
        std::size_t n = len(rng);
        std::uniform_int_distribution<std::size_t> split(0, n);
        std::size_t a = split(rng);
        ShufflePair p;
        p.x = random_monomial_chain(T.left(), rng, a);
        p.y = random_monomial_chain(T.right(), rng, n - a);
        p.deg_x = word_degree(T.left(), p.x.terms().begin()->first);
        ps.push_back(std::move(p));
    }
    return ps;
}

// b∘sh = sh∘(b⊗1 + (−1)^{deg} 1⊗b)
inline SuiteResult shuffle_b(const TensorAlgebra& T0, std::size_t samples, uint64_t seed) {
    return detail::timed("shuffle-b", [&](SuiteResult& r) {
        auto ps = shuffle_pairs(T0, samples, seed, 4);
        detail::collect(r, detail::run_parallel(samples, [&](std::size_t i) -> std::string {
            const TensorAlgebra* T = &T0;
            const auto& p = ps[i];
            auto bl = [&](const Chain& c) { return b_op(T->left(), c); };
            auto br = [&](const Chain& c) { return b_op(T->right(), c); };
            auto sh = [&](const Chain& a, const Chain& b) { return T->sh(a, b); };
            Chain lhs = b_op(T->product(), T->sh(p.x, p.y));
            Chain rhs = p.deg_x ? sh(bl(p.x), p.y) - sh(p.x, br(p.y)) : sh(bl(p.x), p.y) + sh(p.x, br(p.y));
            return lhs == rhs ? std::string() : std::string("b sh != sh b");
        }));
    });
}

// (sh + uSh)∘(b+uB) = (b+uB)∘(sh + uSh) modulo u^U on single-word pairs.
inline SuiteResult shuffle_mixed(const TensorAlgebra& T0, std::size_t samples, uint64_t seed, std::size_t U) {
    return detail::timed("shuffle-mixed", [&](SuiteResult& r) {
        auto ps = shuffle_pairs(T0, samples, seed, 3);
        detail::collect(r, detail::run_parallel(samples, [&](std::size_t i) -> std::string {
            const TensorAlgebra* T = &T0;
            const auto& p = ps[i];
            const EndAlgebra &A = T->left(), &C = T->right(), &E = T->product();
            // u-expansion of (sh + uSh)(op x ⊗ y ± x ⊗ op y)
            auto sgn = [&](const Chain& c) { return p.deg_x ? -c : c; };
            Chain bx = b_op(A, p.x), by = b_op(C, p.y), Bx = B_op(A, p.x), By = B_op(C, p.y);
            ChainSeries lhs(U), rhs(U);
            auto put = [&](ChainSeries& s, std::size_t k, const Chain& c) {
                if (k < U) s[k] += c;
            };
            put(lhs, 0, T->sh(bx, p.y) + sgn(T->sh(p.x, by)));
            put(lhs, 1, T->sh(Bx, p.y) + sgn(T->sh(p.x, By)));
            put(lhs, 1, T->Sh(bx, p.y) + sgn(T->Sh(p.x, by)));
            put(lhs, 2, T->Sh(Bx, p.y) + sgn(T->Sh(p.x, By)));
            Chain s0 = T->sh(p.x, p.y), s1 = U > 1 ? T->Sh(p.x, p.y) : Chain();
            put(rhs, 0, b_op(E, s0));
            put(rhs, 1, B_op(E, s0));
            put(rhs, 1, b_op(E, s1));
            put(rhs, 2, B_op(E, s1));
            for (std::size_t k = 0; k < U; ++k)
                if (lhs[k] != rhs[k]) return "mismatch at u^" + std::to_string(k);
            return {};
        }));
    });
}

// B∘sh(x ⊗ By) = sh(Bx ⊗ By)
inline SuiteResult shuffle_loday(const TensorAlgebra& T0, std::size_t samples, uint64_t seed) {
    return detail::timed("shuffle-B", [&](SuiteResult& r) {
        auto ps = shuffle_pairs(T0, samples, seed, 3);
        detail::collect(r, detail::run_parallel(samples, [&](std::size_t i) -> std::string {
            const TensorAlgebra* T = &T0;
            const auto& p = ps[i];
            Chain By = B_op(T->right(), p.y);
            Chain lhs = B_op(T->product(), T->sh(p.x, By));
            Chain rhs = T->sh(B_op(T->left(), p.x), By);
            return lhs == rhs ? std::string() : std::string("B sh(x, By) != sh(Bx, By)");
        }));
    });
}

// Ψ∘(b+uB) = (b+uB)∘Ψ on u-series, and Ψ∘Ψ = bidual identification.
inline SuiteResult psi_chain_map(const MatrixFactorization& P, Normalization mode, std::size_t samples,
                                 uint64_t seed, std::size_t U = 3, const ChainSampler& s = {}) {
    return detail::timed("psi", [&](SuiteResult& r) {
        EndAlgebra A = EndAlgebra::of(P, mode), D = EndAlgebra::of(dual_mf(P), mode);
        std::mt19937_64 rng(seed);
        std::vector<ChainSeries> xs;
        for (std::size_t i = 0; i < samples; ++i) {
            ChainSeries x(U);
            for (std::size_t k = 0; k < U; ++k) x[k] = random_chain(A, rng, s);
            xs.push_back(std::move(x));
        }
        detail::collect(r, detail::run_parallel(samples, [&](std::size_t i) -> std::string {
            const auto& x = xs[i];
            if (psi_series(A, D, b_plus_uB(A, x)) != b_plus_uB(D, psi_series(A, D, x)))
                return "Psi does not commute with b+uB";
            for (const auto& c : x)
                if (psi_op(D, A, psi_op(A, D, c)) != grading_twist(A, c)) return "Psi∘Psi != bidual identification";
            return {};
        }));
    });
}

// tr∘(b+uB) = (−df∧ + u d)∘tr on random chain series.
inline SuiteResult trace_chain_map(const MatrixFactorization& P, std::size_t samples, uint64_t seed,
                                   std::size_t U = 3, const ChainSampler& s = {}) {
    return detail::timed("trace", [&](SuiteResult& r) {
        EndAlgebra A = EndAlgebra::of(P, Normalization::Scalar);
        std::mt19937_64 rng(seed);
        std::vector<ChainSeries> xs;
        for (std::size_t i = 0; i < samples; ++i) {
            ChainSeries x(U);
            for (std::size_t k = 0; k < U; ++k) x[k] = random_chain(A, rng, s);
            xs.push_back(std::move(x));
        }
        detail::collect(r, detail::run_parallel(samples, [&](std::size_t i) -> std::string {
            TraceMap tr(A);
            FormSeries lhs = tr.series(b_plus_uB(A, xs[i]));
            FormSeries rhs = tr.series(xs[i]).twist_diff(P.f(), A.nvars(), -1);
            if (lhs != rhs) return "tr does not intertwine b+uB with -df+ud";
            return {};
        }));
    });
}

// φ_j and η_j satisfy their identities for j ≤ jmax and every U ≤ Umax.
inline SuiteResult lemma_construction(std::size_t jmax, std::size_t Umax) {
    return detail::timed("phi-eta", [&](SuiteResult& r) {
        std::vector<std::pair<std::size_t, std::size_t>> cases;
        for (std::size_t j = 0; j <= jmax; ++j)
            for (std::size_t U = 1; U <= Umax; ++U) cases.push_back({j, U});
        detail::collect(r, detail::run_parallel(cases.size(), [&](std::size_t i) -> std::string {
            auto [j, U] = cases[i];
            try {
                LemmaAlgebra L;
                phi_construct(j, U, L);
                ChainSeries eta = eta_construct(j, U, L);
                // α = 0 recovers y^j
                Chain plain;
                for (const auto& [w, c] : eta[0].terms())
                    if (w.cech == 0) plain.add_raw(w, c);
                if (plain != y_power(j, L)) return "eta at alpha = 0 is not y^j";
                for (std::size_t k = 1; k < U; ++k)
                    for (const auto& [w, c] : eta[k].terms())
                        if (w.cech == 0) return "eta has alpha-free higher u terms";
            } catch (const Error& e) {
                return e.what();
            }
            return {};
        }));
    });
}

}  // namespace mfhrr::suites
