// mfhrr command-line front end.

#include <cctype>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfhrr/corpus.hpp"
#include "mfhrr/hkr.hpp"
#include "mfhrr/homalg.hpp"
#include "mfhrr/io.hpp"
#include "mfhrr/pairing.hpp"
#include "mfhrr/residue.hpp"

using namespace mfhrr;
using io::json;

namespace {

struct RunConfig {
    std::string order = "degrevlex";
    std::size_t utrunc = 8;
    uint64_t seed = 1;
    std::size_t max_spairs = 0;
    std::string format;
    bool timings = false;

    GroebnerOptions groebner() const {
        GroebnerOptions g;
        g.order = order == "lex" ? MonomialOrder::Lex : MonomialOrder::DegRevLex;
        if (max_spairs > 0) g.max_spairs = max_spairs;
        return g;
    }
    bool text(const char* fallback = "json") const { return (format.empty() ? std::string(fallback) : format) == "text"; }
};

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur += c;
        }
    }
    if (!cur.empty() || !out.empty()) out.push_back(cur);
    return out;
}

// Identifiers in order of first appearance.
std::vector<std::string> infer_vars(const std::vector<std::string>& texts) {
    std::vector<std::string> names;
    for (const auto& t : texts)
        for (std::size_t i = 0; i < t.size();) {
            if (std::isalpha(static_cast<unsigned char>(t[i]))) {
                std::size_t k = i;
                while (k < t.size() && (std::isalnum(static_cast<unsigned char>(t[k])) || t[k] == '_')) ++k;
                std::string s = t.substr(i, k - i);
                if (std::find(names.begin(), names.end(), s) == names.end()) names.push_back(s);
                i = k;
            } else {
                ++i;
            }
        }
    return names;
}

MatrixFactorization load_mf(const std::string& path) { return io::mf_from_json(io::load_json(path), path); }

std::string fmt_chern(const Ring& r, const FormSeries& s) {
    std::string out;
    for (std::size_t k = 0; k < s.truncation(); ++k) {
        if (s[k].is_zero()) continue;
        if (!out.empty()) out += " + ";
        out += "u^" + std::to_string(k) + "*(" + s[k].format(r) + ")";
    }
    return out.empty() ? "0" : out;
}

int cmd_validate(const RunConfig& cfg, const std::string& path) {
    MatrixFactorization P = load_mf(path);
    if (cfg.text("text")) {
        std::cout << "δ² = f·id verified (rank " << P.rank0() << "|" << P.rank1() << ", f = " << P.ring().format(P.f())
                  << ")\n";
    } else {
        emit({{"valid", true}, {"message", "δ² = f·id verified"}, {"rank", {P.rank0(), P.rank1()}},
              {"f", P.ring().format(P.f())}});
    }
    return 0;
}

int cmd_koszul(const RunConfig& cfg, const std::string& vars, const std::string& a, const std::string& b) {
    Ring r(split_list(vars));
    std::vector<Poly> pa, pb;
    for (const auto& s : split_list(a)) pa.push_back(r.parse(s));
    for (const auto& s : split_list(b)) pb.push_back(r.parse(s));
    MatrixFactorization K = koszul_mf(r, pa, pb);
    if (cfg.text()) {
        std::cout << "f = " << r.format(K.f()) << "\nrank " << K.rank0() << "|" << K.rank1() << "\n";
        std::cout << "delta0 = " << io::matrix_to_json(r, K.delta0()).dump() << "\n";
        std::cout << "delta1 = " << io::matrix_to_json(r, K.delta1()).dump() << "\n";
    } else {
        emit(io::mf_to_json(K));
    }
    return 0;
}

int cmd_ext(const RunConfig& cfg, const std::string& p, const std::string& q) {
    MatrixFactorization P = load_mf(p), Q = load_mf(q);
    ExtReport e = ext_dims(P, Q, cfg.groebner());
    if (cfg.text()) {
        std::cout << "Ext^0 = " << e.dim_ext0 << "\nExt^1 = " << e.dim_ext1 << "\nchi = " << e.chi << "\n";
    } else {
        emit({{"ext", {e.dim_ext0, e.dim_ext1}}, {"chi", e.chi}});
    }
    return 0;
}

int cmd_chern(const RunConfig& cfg, const std::string& path) {
    MatrixFactorization P = load_mf(path);
    ChernForm c = chern_form(P, cfg.utrunc);
    const Ring& r = P.ring();
    bool even = r.nvars() % 2 == 0;
    if (cfg.text()) {
        std::cout << "ch = " << fmt_chern(r, c.series) << "\n";
        if (even) std::cout << "top coefficient = " << r.format(c.top_coefficient()) << "\n";
    } else {
        json j{{"vars", r.names()}, {"f", r.format(P.f())}, {"chern", io::form_series_to_json(r, c.series)}};
        j["top_coefficient"] = even ? json(r.format(c.top_coefficient())) : json(nullptr);
        emit(j);
    }
    return 0;
}

int cmd_residue(const RunConfig& cfg, const std::string& fs, const std::string& num, const std::string& vars) {
    Ring r(vars.empty() ? infer_vars({fs, num}) : split_list(vars));
    Poly f = r.parse(fs), g = r.parse(num);
    ResidueCover cv = jacobian_cover(f, r.nvars(), cfg.groebner());
    Rational v = residue_with_cover(g, cv);
    if (cfg.text()) {
        std::cout << "Res = " << to_string(v) << "\n";
    } else {
        json cover{{"exponents", cv.exponents}, {"cofactors", io::matrix_to_json(r, cv.cofactors)}, {"det", r.format(cv.det)}};
        emit({{"value", io::rational(v)}, {"cover", cover}, {"vars", r.names()}});
    }
    return 0;
}

int cmd_pair(const RunConfig& cfg, const std::string& p, const std::string& q) {
    MatrixFactorization P = load_mf(p), Q = load_mf(q);
    PairingReport rep = hrr_check(P, Q, cfg.groebner());
    if (cfg.text()) {
        std::cout << "chi_ext = " << rep.chi_ext << "\nchi_residue = " << to_string(rep.chi_residue)
                  << "\nepsilon = " << rep.signs.epsilon << " (n = " << rep.signs.n << ")\npass = "
                  << (rep.pass ? "yes" : "no") << "\n";
    } else {
        emit(pairing_json(rep));
    }
    return rep.pass ? 0 : 1;
}

int cmd_corpus(const RunConfig& cfg, const std::string& path, bool with_suites) {
    RunOptions opt;
    opt.groebner = cfg.groebner();
    opt.suites = with_suites;
    opt.seed = cfg.seed;
    opt.utrunc = cfg.utrunc;
    opt.timings = cfg.timings;
    CorpusReport rep = run_corpus(load_corpus(path), opt);
    if (cfg.text()) std::cout << report_text(rep);
    else emit(report_json(rep));
    return rep.pass() ? 0 : 1;
}

int cmd_hoch_verify(const RunConfig& cfg) {
    CorpusReport rep;
    rep.options.seed = cfg.seed;
    rep.options.utrunc = cfg.utrunc;
    rep.options.timings = cfg.timings;
    rep.suites_run = true;
    rep.suites = run_identity_suites(cfg.seed, cfg.utrunc);
    if (cfg.text()) std::cout << report_text(rep);
    else {
        json j = report_json(rep);
        j.erase("entries");
        emit(j);
    }
    return rep.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact matrix-factorization HRR engine"};
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig cfg;
    app.add_option("--order", cfg.order, "Monomial order")->check(CLI::IsMember({"degrevlex", "lex"}));
    app.add_option("--utrunc", cfg.utrunc, "u-truncation U (number of u-coefficients)")->check(CLI::Range(1, 64));
    app.add_option("--seed", cfg.seed, "Seed for the identity suites");
    app.add_option("--max-spairs", cfg.max_spairs, "S-pair cap (also MFHRR_MAX_SPAIRS)");
    app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "text"}));
    app.add_flag("--timings", cfg.timings, "Include timings in reports");

    std::string mf_path, p_path, q_path, corpus_path, vars, a, b, f, numerator;
    auto* validate = app.add_subcommand("validate", "Check δ² = f·id for an MF JSON file");
    validate->add_option("--mf", mf_path, "MF JSON file")->required();
    auto* koszul = app.add_subcommand("koszul", "Build a Koszul matrix factorization");
    koszul->add_option("--vars", vars, "Comma-separated variable names")->required();
    koszul->add_option("--a", a, "Comma-separated a_i")->required();
    koszul->add_option("--b", b, "Comma-separated b_i")->required();
    auto* ext = app.add_subcommand("ext", "Ext dimensions and Euler characteristic of Hom(P, Q)");
    ext->add_option("--p", p_path, "MF JSON for P")->required();
    ext->add_option("--q", q_path, "MF JSON for Q")->required();
    auto* chern = app.add_subcommand("chern", "Chern form tr(id[])");
    chern->add_option("--mf", mf_path, "MF JSON file")->required();
    auto* residue = app.add_subcommand("residue", "Res[g dx/(∂f)]");
    residue->add_option("--f", f, "Potential")->required();
    residue->add_option("--numerator", numerator, "Numerator g")->required();
    residue->add_option("--vars", vars, "Comma-separated variable order (default: order of appearance)");
    auto* pair = app.add_subcommand("pair", "Residue pairing against the Euler characteristic");
    pair->add_option("--p", p_path, "MF JSON for P")->required();
    pair->add_option("--q", q_path, "MF JSON for Q")->required();
    auto* hrr = app.add_subcommand("hrr", "HRR checks over a corpus");
    hrr->add_option("--corpus", corpus_path, "Corpus JSON file")->required();
    auto* hoch = app.add_subcommand("hoch-verify", "Hochschild, shuffle, Psi, phi/eta and trace identity suites");
    auto* corpus = app.add_subcommand("corpus", "Corpus checks plus identity suites");
    corpus->add_option("--corpus", corpus_path, "Corpus JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*validate) return cmd_validate(cfg, mf_path);
        if (*koszul) return cmd_koszul(cfg, vars, a, b);
        if (*ext) return cmd_ext(cfg, p_path, q_path);
        if (*chern) return cmd_chern(cfg, mf_path);
        if (*residue) return cmd_residue(cfg, f, numerator, vars);
        if (*pair) return cmd_pair(cfg, p_path, q_path);
        if (*hrr) return cmd_corpus(cfg, corpus_path, false);
        if (*hoch) return cmd_hoch_verify(cfg);
        if (*corpus) return cmd_corpus(cfg, corpus_path, true);
    } catch (const mfhrr::Error& e) {
        std::cerr << "mfhrr: " << e.kind() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "mfhrr: error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
