#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mfhrr/io.hpp"
#include "mfhrr/pairing.hpp"
#include "mfhrr/suites.hpp"

namespace mfhrr {

// ---------------------------------------------------------------------------
// Corpus input

// Entries keep their JSON source so that malformed entries fail individually.
struct CorpusEntry {
    std::string name;
    io::json source;
};

inline std::vector<CorpusEntry> corpus_from_json(const io::json& j) {
    if (!j.is_array()) throw InputError("corpus must be a JSON array of entries");
    std::vector<CorpusEntry> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::string name = "entry" + std::to_string(i);
        if (j[i].is_object() && j[i].contains("name") && j[i]["name"].is_string()) name = j[i]["name"].get<std::string>();
        out.push_back({name, j[i]});
    }
    return out;
}

inline std::vector<CorpusEntry> load_corpus(const std::string& path) { return corpus_from_json(io::load_json(path)); }

// ---------------------------------------------------------------------------
// Results

struct CheckResult {
    std::string name;
    std::size_t cases = 0;
    std::vector<std::string> failures;
    bool pass() const { return failures.empty(); }
};

struct PairResult {
    std::size_t p = 0, q = 0;
    PairingReport report;
};

struct EntryResult {
    std::string name;
    std::vector<std::string> vars;
    std::string f;
    std::size_t n = 0, milnor = 0;
    std::vector<PairResult> pairs;
    std::vector<CheckResult> checks;
    std::vector<int> tensor_signs;
    std::optional<SignRecord> signs;
    std::optional<io::json> error;
    double seconds = 0;

    bool pass() const {
        if (error) return false;
        for (const auto& p : pairs)
            if (!p.report.pass) return false;
        for (const auto& c : checks)
            if (!c.pass()) return false;
        return true;
    }
};

struct RunOptions {
    GroebnerOptions groebner;
    bool suites = false;
    uint64_t seed = 1;
    std::size_t utrunc = 8;
    bool timings = false;
};

struct CorpusReport {
    std::vector<EntryResult> entries;
    std::vector<suites::SuiteResult> suites;
    bool suites_run = false;
    RunOptions options;

    // nonzero tensor signs agree across the corpus
    bool tensor_sign_constant(int* sign = nullptr) const {
        int s = 0;
        for (const auto& e : entries)
            for (int t : e.tensor_signs) {
                if (t == 0) continue;
                if (s == 0) s = t;
                else if (s != t) return false;
            }
        if (sign) *sign = s;
        return true;
    }
    bool pass() const {
        for (const auto& e : entries)
            if (!e.pass()) return false;
        for (const auto& s : suites)
            if (!s.pass()) return false;
        return tensor_sign_constant();
    }
};

// ---------------------------------------------------------------------------
// Running entries

namespace detail {

inline bool is_rank_one(const MatrixFactorization& P) { return P.rank0() == 1 && P.rank1() == 1; }

inline std::string pair_label(std::size_t i, std::size_t j) {
    return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

inline int parity_sign(std::size_t n) { return n % 2 ? -1 : 1; }

}  // namespace detail

inline EntryResult run_entry(const CorpusEntry& entry, const RunOptions& opt = {}) {
    auto t0 = std::chrono::steady_clock::now();
    EntryResult r;
    r.name = entry.name;
    const io::json& j = entry.source;
    const GroebnerOptions& g = opt.groebner;
    try {
        if (!j.is_object()) throw InputError(entry.name + ": entry must be a JSON object");
        Ring ring = io::ring_from_json(io::field(j, "vars", entry.name), entry.name);
        r.vars = ring.names();
        Poly f = ring.parse(io::string_field(j, "f", entry.name));
        r.f = ring.format(f);
        r.n = ring.nvars();
        r.milnor = check_isolated_singularity(f, r.n, g);
        const io::json& mj = io::field(j, "mfs", entry.name);
        if (!mj.is_array()) throw InputError(entry.name + ": 'mfs' must be an array");
        std::vector<MatrixFactorization> mfs;
        for (std::size_t i = 0; i < mj.size(); ++i)
            mfs.push_back(io::mf_from_json(mj[i], entry.name + ".mfs[" + std::to_string(i) + "]", &ring, &f));
        std::vector<std::string> checks{"hrr"};
        if (j.contains("checks")) {
            if (!j.at("checks").is_array()) throw InputError(entry.name + ": 'checks' must be an array");
            checks.clear();
            for (const auto& c : j.at("checks")) {
                if (!c.is_string()) throw InputError(entry.name + ": check names must be strings");
                checks.push_back(c.get<std::string>());
            }
        }
        r.signs = sign_record(r.n);
        int sgn_n = detail::parity_sign(r.n);
        std::size_t m = mfs.size();
        for (const auto& name : checks) {
            if (name == "hrr") {
                for (std::size_t a = 0; a < m; ++a)
                    for (std::size_t b = 0; b < m; ++b) r.pairs.push_back({a, b, hrr_check(mfs[a], mfs[b], g)});
            } else if (name == "symmetry") {
                CheckResult c{name};
                for (std::size_t a = 0; a < m; ++a)
                    for (std::size_t b = a; b < m; ++b) {
                        ++c.cases;
                        long pq = euler_chi(mfs[a], mfs[b], g), qp = euler_chi(mfs[b], mfs[a], g);
                        if (pq != sgn_n * qp)
                            c.failures.push_back("chi" + detail::pair_label(a, b) + " = " + std::to_string(pq) +
                                                 ", chi" + detail::pair_label(b, a) + " = " + std::to_string(qp));
                        Rational x = canonical_pairing_u0(mfs[a], mfs[b], g), y = canonical_pairing_u0(mfs[b], mfs[a], g);
                        if (x != Rational(sgn_n) * y)
                            c.failures.push_back("pairing" + detail::pair_label(a, b) + " = " + to_string(x) +
                                                 ", pairing" + detail::pair_label(b, a) + " = " + to_string(y));
                    }
                r.checks.push_back(std::move(c));
            } else if (name == "shift") {
                CheckResult c{name};
                for (std::size_t a = 0; a < m; ++a)
                    for (std::size_t b = 0; b < m; ++b) {
                        ++c.cases;
                        MatrixFactorization sq = shift_mf(mfs[b]);
                        Rational x = canonical_pairing_u0(mfs[a], mfs[b], g), y = canonical_pairing_u0(mfs[a], sq, g);
                        if (y != -x)
                            c.failures.push_back("pairing" + detail::pair_label(a, b) + " = " + to_string(x) +
                                                 " but with shifted Q = " + to_string(y));
                        long cx = euler_chi(mfs[a], mfs[b], g), cy = euler_chi(mfs[a], sq, g);
                        if (cy != -cx)
                            c.failures.push_back("chi" + detail::pair_label(a, b) + " = " + std::to_string(cx) +
                                                 " but with shifted Q = " + std::to_string(cy));
                    }
                r.checks.push_back(std::move(c));
            } else if (name == "sum") {
                CheckResult c{name};
                for (std::size_t a = 0; a + 1 < m; ++a) {
                    MatrixFactorization s = direct_sum(mfs[a], mfs[a + 1]);
                    for (std::size_t b = 0; b < m; ++b) {
                        ++c.cases;
                        Rational lhs = canonical_pairing_u0(s, mfs[b], g);
                        Rational rhs = canonical_pairing_u0(mfs[a], mfs[b], g) + canonical_pairing_u0(mfs[a + 1], mfs[b], g);
                        if (lhs != rhs)
                            c.failures.push_back("pairing(P" + std::to_string(a) + "+P" + std::to_string(a + 1) + ", Q" +
                                                 std::to_string(b) + ") = " + to_string(lhs) + " != " + to_string(rhs));
                        long cl = euler_chi(s, mfs[b], g);
                        long cr = euler_chi(mfs[a], mfs[b], g) + euler_chi(mfs[a + 1], mfs[b], g);
                        if (cl != cr)
                            c.failures.push_back("chi(P" + std::to_string(a) + "+P" + std::to_string(a + 1) + ", Q" +
                                                 std::to_string(b) + ") = " + std::to_string(cl) + " != " + std::to_string(cr));
                    }
                }
                r.checks.push_back(std::move(c));
            } else if (name == "tensor") {
                CheckResult c{name};
                if (2 * r.n > 4) throw InputError(entry.name + ": the tensor check supports at most two variables");
                for (std::size_t a = 0; a < m; ++a)
                    for (std::size_t b = 0; b < m; ++b) {
                        if (!detail::is_rank_one(mfs[a]) || !detail::is_rank_one(mfs[b])) continue;
                        ++c.cases;
                        TensorCheck t = tensor_chi(mfs[a], mfs[b], mfs[a], mfs[b], g);
                        if (!t.consistent)
                            c.failures.push_back("chi of tensor " + detail::pair_label(a, b) + " = " +
                                                 std::to_string(t.chi_tensor) + " vs product " +
                                                 std::to_string(t.chi_left * t.chi_right));
                        r.tensor_signs.push_back(t.sign);
                    }
                r.checks.push_back(std::move(c));
            } else {
                throw InputError(entry.name + ": unknown check '" + name + "'");
            }
        }
    } catch (const std::exception& e) {
        r.error = io::error_json(e);
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// ---------------------------------------------------------------------------
// Identity suites

// res∘tr(η_j) = −[j = 0] at every u-power, n = 1.
inline suites::SuiteResult trace_residue(std::size_t jmax, std::size_t U) {
    return suites::detail::timed("trace-residue", [&](suites::SuiteResult& r) {
        suites::detail::collect(r, suites::detail::run_parallel(jmax + 1, [&](std::size_t j) -> std::string {
            LemmaAlgebra L;
            ChainSeries eta = eta_construct(j, U, L);
            std::vector<Rational> res = cech_residue(tr_nabla_cech(L.alg, eta), 1, U);
            for (std::size_t k = 0; k < U; ++k) {
                Rational want = (k == 0 && j == 0) ? Rational(-1) : Rational(0);
                if (res[k] != want)
                    return "res tr(eta_" + std::to_string(j) + ") at u^" + std::to_string(k) + " = " + to_string(res[k]);
            }
            return {};
        }));
    });
}

// Word counts in φ_j grow binomially in U; the one-variable suites stop here.
inline constexpr std::size_t kLemmaMaxU = 6;

// The Hochschild, shuffle, Ψ, φ/η and trace suites with fixed sample sizes.
inline std::vector<suites::SuiteResult> run_identity_suites(uint64_t seed, std::size_t U) {
    using namespace suites;
    std::vector<SuiteResult> out;
    auto named = [&](SuiteResult s, const std::string& name) {
        s.name = name;
        out.push_back(std::move(s));
    };
    MatrixFactorization sq = koszul_square(), xy = koszul_xy();
    named(mixed_complex(EndAlgebra::of(sq, Normalization::Scalar), 100, seed), "mixed-complex x^2");
    named(mixed_complex(EndAlgebra::of(xy, Normalization::Scalar), 100, seed + 1), "mixed-complex xy");
    named(mixed_complex(EndAlgebra::of(sq, Normalization::Module), 50, seed + 2), "mixed-complex x^2 module");
    Ring r({"x", "y"});
    TensorAlgebra T(koszul_mf(r, {Poly::var(0)}, {Poly::var(0)}), koszul_mf(r, {Poly::var(1)}, {Poly::var(1, 2)}),
                    Normalization::Scalar);
    named(shuffle_b(T, 100, seed + 3), "shuffle b");
    named(shuffle_mixed(T, 100, seed + 4, U), "shuffle b+uB");
    named(shuffle_loday(T, 100, seed + 5), "shuffle Loday");
    named(psi_chain_map(sq, Normalization::Module, 50, seed + 6), "psi x^2");
    named(psi_chain_map(xy, Normalization::Scalar, 50, seed + 7), "psi xy");
    std::size_t Ulemma = std::clamp<std::size_t>(U, 2, kLemmaMaxU);
    named(lemma_construction(4, Ulemma), "phi-eta");
    named(trace_chain_map(sq, 100, seed + 8), "trace chain map x^2");
    named(trace_chain_map(xy, 100, seed + 9), "trace chain map xy");
    named(trace_residue(4, Ulemma), "trace residue");
    return out;
}

inline CorpusReport run_corpus(const std::vector<CorpusEntry>& entries, const RunOptions& opt = {}) {
    CorpusReport rep;
    rep.options = opt;
    rep.entries.resize(entries.size());
    std::vector<std::string> unused = suites::detail::run_parallel(entries.size(), [&](std::size_t i) -> std::string {
        rep.entries[i] = run_entry(entries[i], opt);
        return {};
    });
    (void)unused;
    if (opt.suites) {
        rep.suites_run = true;
        rep.suites = run_identity_suites(opt.seed, opt.utrunc);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Reports

inline io::json suite_json(const suites::SuiteResult& s, bool timings) {
    io::json j;
    j["name"] = s.name;
    j["samples"] = s.samples;
    j["failures"] = s.failures;
    j["pass"] = s.pass();
    if (!s.first_failure.empty()) j["first_failure"] = s.first_failure;
    if (timings) j["seconds"] = s.seconds;
    return j;
}

inline io::json signs_json(const SignRecord& s) {
    return io::json{{"n", s.n}, {"epsilon", s.epsilon}, {"hrr_sign", s.hrr_sign}};
}

inline io::json pairing_json(const PairingReport& p) {
    return io::json{{"chi_ext", p.chi_ext},
                    {"chi_residue", io::rational(p.chi_residue)},
                    {"ext", {p.dim_ext0, p.dim_ext1}},
                    {"signs", signs_json(p.signs)},
                    {"pass", p.pass}};
}

inline io::json entry_json(const EntryResult& e, bool timings) {
    io::json j;
    j["name"] = e.name;
    j["pass"] = e.pass();
    if (e.error) {
        j["error"] = *e.error;
    } else {
        j["vars"] = e.vars;
        j["f"] = e.f;
        j["n"] = e.n;
        j["milnor"] = e.milnor;
        if (e.signs) j["signs"] = signs_json(*e.signs);
        io::json pairs = io::json::array();
        for (const auto& p : e.pairs) {
            io::json pj = pairing_json(p.report);
            pj.erase("signs");
            pj["P"] = p.p;
            pj["Q"] = p.q;
            pairs.push_back(pj);
        }
        j["pairs"] = pairs;
        io::json checks = io::json::object();
        for (const auto& c : e.checks)
            checks[c.name] = io::json{{"cases", c.cases}, {"failures", c.failures}, {"pass", c.pass()}};
        j["checks"] = checks;
        if (!e.tensor_signs.empty()) j["tensor_signs"] = e.tensor_signs;
    }
    if (timings) j["seconds"] = e.seconds;
    return j;
}

inline io::json report_json(const CorpusReport& r) {
    io::json j;
    j["entries"] = io::json::array();
    for (const auto& e : r.entries) j["entries"].push_back(entry_json(e, r.options.timings));
    io::json summary;
    summary["pass"] = r.pass();
    if (!r.entries.empty()) {
        std::size_t failed = 0;
        for (const auto& e : r.entries) failed += e.pass() ? 0 : 1;
        summary["entries"] = r.entries.size();
        summary["failed"] = failed;
        int s = 0;
        bool constant = r.tensor_sign_constant(&s);
        if (constant && s != 0) summary["tensor_sign"] = s;
        if (!constant) summary["tensor_sign"] = "inconsistent";
    }
    if (r.suites_run) {
        j["suites"] = io::json::array();
        for (const auto& s : r.suites) j["suites"].push_back(suite_json(s, r.options.timings));
        j["config"] = io::json{{"seed", r.options.seed}, {"utrunc", r.options.utrunc}, {"lemma_utrunc", std::clamp<std::size_t>(r.options.utrunc, 2, kLemmaMaxU)}};
    }
    j["summary"] = summary;
    return j;
}

inline std::string report_text(const CorpusReport& r) {
    std::vector<std::array<std::string, 4>> rows;
    rows.push_back({"entry", "χ_ext", "χ_res", "pass"});
    for (const auto& e : r.entries) {
        if (e.error) {
            rows.push_back({e.name, "-", "-", "error"});
            continue;
        }
        for (const auto& p : e.pairs)
            rows.push_back({e.name + " " + detail::pair_label(p.p, p.q), std::to_string(p.report.chi_ext),
                            to_string(p.report.chi_residue), p.report.pass ? "yes" : "no"});
    }
    // display width: count code points, not bytes
    auto width = [](const std::string& s) {
        std::size_t w = 0;
        for (unsigned char c : s) w += (c & 0xC0) != 0x80;
        return w;
    };
    std::array<std::size_t, 4> wd{};
    for (const auto& row : rows)
        for (std::size_t k = 0; k < 4; ++k) wd[k] = std::max(wd[k], width(row[k]));
    std::ostringstream out;
    if (r.entries.empty()) rows.clear();
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < 4; ++k) {
            std::string pad(wd[k] - width(row[k]), ' ');
            if (k == 0) out << row[k] << pad;
            else out << " | " << pad << row[k];
        }
        out << "\n";
    }
    for (const auto& e : r.entries) {
        if (e.error) out << e.name << ": " << (*e.error)["kind"].get<std::string>() << ": "
                         << (*e.error)["message"].get<std::string>() << "\n";
        for (const auto& c : e.checks) {
            out << e.name << " check " << c.name << ": " << c.cases << " cases, " << (c.pass() ? "pass" : "FAIL") << "\n";
            for (const auto& f : c.failures) out << "  " << f << "\n";
        }
    }
    for (const auto& s : r.suites) {
        out << "suite " << s.name << ": " << s.samples << " samples, " << (s.pass() ? "pass" : "FAIL");
        if (r.options.timings) out << " (" << std::fixed << std::setprecision(2) << s.seconds << " s)";
        out << "\n";
        if (!s.first_failure.empty()) out << "  " << s.first_failure << "\n";
    }
    out << "summary: " << (r.pass() ? "pass" : "FAIL") << "\n";
    return out.str();
}

}  // namespace mfhrr
