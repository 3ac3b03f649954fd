#pragma once

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "mfhrr/matrix.hpp"
#include "mfhrr/poly.hpp"

namespace mfhrr {

struct VTerm {
    uint32_t comp;
    Monomial m;
    Rational c;
};

// Position-over-term order; component 0 is the largest.
struct ModuleOrder {
    MonomialOrder mono = MonomialOrder::DegRevLex;

    int cmp(uint32_t ca, const Monomial& a, uint32_t cb, const Monomial& b) const {
        if (ca != cb) return ca < cb ? 1 : -1;
        return compare(a, b, mono);
    }
};

// Element of a free module Q^r, terms sorted descending in the module order.
class ModElem {
public:
    ModElem() = default;

    static ModElem from_vector(const PolyVector& v, const ModuleOrder& ord, uint32_t offset = 0) {
        ModElem r;
        for (std::size_t k = 0; k < v.size(); ++k)
            for (const auto& t : v[k].terms()) r.t_.push_back({static_cast<uint32_t>(k) + offset, t.m, t.c});
        r.sort(ord);
        return r;
    }
    static ModElem unit(uint32_t comp, const Rational& c = 1) {
        ModElem r;
        r.t_.push_back({comp, Monomial{}, c});
        return r;
    }

    PolyVector to_vector(std::size_t rank, uint32_t offset = 0) const {
        std::vector<std::vector<Term>> parts(rank);
        for (const auto& t : t_) {
            if (t.comp < offset || t.comp - offset >= rank) throw InternalError("module component out of range");
            parts[t.comp - offset].push_back({t.m, t.c});
        }
        PolyVector v(rank);
        for (std::size_t k = 0; k < rank; ++k) v[k] = Poly::from_terms(std::move(parts[k]));
        return v;
    }

    bool is_zero() const { return t_.empty(); }
    const VTerm& lead() const { return t_.front(); }
    const std::vector<VTerm>& terms() const { return t_; }
    std::size_t size() const { return t_.size(); }

    void make_monic(ModElem* cof = nullptr) {
        if (t_.empty()) return;
        Rational inv = 1 / t_.front().c;
        if (inv == 1) return;
        for (auto& t : t_) t.c *= inv;
        if (cof)
            for (auto& t : cof->t_) t.c *= inv;
    }

    // this -= c·m·g
    void sub_mul(const Rational& c, const Monomial& m, const ModElem& g, const ModuleOrder& ord) {
        std::vector<VTerm> out;
        out.reserve(t_.size() + g.t_.size());
        std::size_t i = 0, j = 0;
        while (i < t_.size() || j < g.t_.size()) {
            int k;
            Monomial gm;
            if (j < g.t_.size()) gm = g.t_[j].m * m;
            if (i == t_.size()) k = -1;
            else if (j == g.t_.size()) k = 1;
            else k = ord.cmp(t_[i].comp, t_[i].m, g.t_[j].comp, gm);
            if (k > 0) {
                out.push_back(std::move(t_[i++]));
            } else if (k < 0) {
                out.push_back({g.t_[j].comp, gm, -c * g.t_[j].c});
                ++j;
            } else {
                Rational s = t_[i].c - c * g.t_[j].c;
                if (sgn(s) != 0) out.push_back({t_[i].comp, gm, std::move(s)});
                ++i;
                ++j;
            }
        }
        t_ = std::move(out);
    }
    void add_mul(const Rational& c, const Monomial& m, const ModElem& g, const ModuleOrder& ord) {
        sub_mul(-c, m, g, ord);
    }

    // Moves the leading term into `rest`.
    void pop_lead_into(ModElem& rest) {
        rest.t_.push_back(std::move(t_.front()));
        t_.erase(t_.begin());
    }

    void sort(const ModuleOrder& ord) {
        std::sort(t_.begin(), t_.end(),
                  [&](const VTerm& a, const VTerm& b) { return ord.cmp(a.comp, a.m, b.comp, b.m) > 0; });
        std::vector<VTerm> out;
        for (auto& t : t_) {
            if (!out.empty() && out.back().comp == t.comp && out.back().m == t.m) {
                out.back().c += t.c;
                if (sgn(out.back().c) == 0) out.pop_back();
            } else {
                out.push_back(std::move(t));
            }
        }
        t_ = std::move(out);
    }

private:
    std::vector<VTerm> t_;
};

inline std::size_t default_max_spairs() {
    if (const char* env = std::getenv("MFHRR_MAX_SPAIRS")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return 1'000'000;
}

struct GroebnerOptions {
    MonomialOrder order = MonomialOrder::DegRevLex;
    std::size_t max_spairs = default_max_spairs();
    bool track_cofactors = false;
};

struct GroebnerStats {
    std::size_t spairs = 0;
    std::size_t zero_reductions = 0;
    std::size_t basis_size = 0;
};

class GroebnerBasis {
public:
    std::size_t rank = 1;
    ModuleOrder order;
    bool reduced = true;
    std::size_t ngens = 0;  // number of input generators
    std::vector<ModElem> elems;
    // cofactors[k] ∈ Q^{ngens}: elems[k] = Σ_j cofactors[k]_j · gen_j
    std::vector<ModElem> cofactors;
    GroebnerStats stats;

    bool tracks_cofactors() const { return cofactors.size() == elems.size() && !elems.empty(); }

    std::vector<Poly> polys() const {
        if (rank != 1) throw ShapeMismatch("module basis viewed as an ideal basis");
        std::vector<Poly> out;
        for (const auto& e : elems) out.push_back(e.to_vector(1)[0]);
        return out;
    }
    std::vector<PolyVector> vectors() const {
        std::vector<PolyVector> out;
        for (const auto& e : elems) out.push_back(e.to_vector(rank));
        return out;
    }
};

namespace detail {

// Full reduction of p against G.  When `qcof` is given, accumulates the
// quotient expressed in input generators: p_in = Σ q_k·G_k + remainder.
inline ModElem reduce_ptr(ModElem p, const std::vector<const ModElem*>& G, const ModuleOrder& ord,
                          const std::vector<const ModElem*>* gcof = nullptr, ModElem* qcof = nullptr,
                          std::size_t skip = static_cast<std::size_t>(-1)) {
    ModElem rem;
    while (!p.is_zero()) {
        const VTerm& lt = p.lead();
        bool hit = false;
        for (std::size_t k = 0; k < G.size(); ++k) {
            if (k == skip) continue;
            const VTerm& gl = G[k]->lead();
            if (gl.comp != lt.comp || !gl.m.divides(lt.m)) continue;
            Monomial q = lt.m / gl.m;
            Rational c = lt.c / gl.c;
            if (qcof) qcof->add_mul(c, q, *(*gcof)[k], ord);
            p.sub_mul(c, q, *G[k], ord);
            hit = true;
            break;
        }
        if (!hit) p.pop_lead_into(rem);
    }
    return rem;
}

inline std::vector<const ModElem*> pointers(const std::vector<ModElem>& v) {
    std::vector<const ModElem*> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(&e);
    return out;
}

inline ModElem reduce(ModElem p, const std::vector<ModElem>& G, const ModuleOrder& ord,
                      const std::vector<ModElem>* gcof = nullptr, ModElem* qcof = nullptr,
                      std::size_t skip = static_cast<std::size_t>(-1)) {
    auto gp = pointers(G);
    if (gcof) {
        auto cp = pointers(*gcof);
        return reduce_ptr(std::move(p), gp, ord, &cp, qcof, skip);
    }
    return reduce_ptr(std::move(p), gp, ord, nullptr, nullptr, skip);
}

struct SPair {
    std::size_t i, j;
    Monomial lcm;
    uint32_t comp;
    std::size_t serial;
};

}  // namespace detail

// Buchberger's algorithm with the Gebauer–Möller criteria and the normal
// selection strategy.  Returns a reduced, monic basis.
inline GroebnerBasis buchberger_module(const std::vector<PolyVector>& gens, std::size_t rank,
                                       const GroebnerOptions& opt = {}) {
    GroebnerBasis gb;
    gb.rank = rank;
    gb.order.mono = opt.order;
    gb.ngens = gens.size();
    const ModuleOrder& ord = gb.order;
    const bool track = opt.track_cofactors;
    const bool ideal = rank == 1;

    std::vector<ModElem> store, scof;
    std::vector<std::size_t> G;
    std::vector<detail::SPair> B;
    std::size_t serial = 0;

    auto lcm_of = [&](std::size_t a, std::size_t b) { return store[a].lead().m.lcm(store[b].lead().m); };

    auto update = [&](std::size_t h) {
        const VTerm& lh = store[h].lead();
        std::vector<std::size_t> C;
        for (std::size_t g : G)
            if (store[g].lead().comp == lh.comp) C.push_back(g);
        std::vector<std::size_t> D;
        for (std::size_t k = 0; k < C.size(); ++k) {
            std::size_t g1 = C[k];
            Monomial l1 = lcm_of(h, g1);
            bool keep = ideal && lh.m.coprime(store[g1].lead().m);
            if (!keep) {
                keep = true;
                for (std::size_t t = k + 1; t < C.size() && keep; ++t)
                    if (lcm_of(h, C[t]).divides(l1)) keep = false;
                for (std::size_t g2 : D)
                    if (keep && lcm_of(h, g2).divides(l1)) keep = false;
            }
            if (keep) D.push_back(g1);
        }
        std::vector<detail::SPair> Bn;
        for (auto& p : B) {
            if (p.comp == lh.comp && lh.m.divides(p.lcm) && !(lcm_of(p.i, h) == p.lcm) &&
                !(lcm_of(h, p.j) == p.lcm))
                continue;
            Bn.push_back(std::move(p));
        }
        for (std::size_t g : D) {
            if (ideal && lh.m.coprime(store[g].lead().m)) continue;
            Bn.push_back({g, h, lcm_of(g, h), lh.comp, serial++});
        }
        B = std::move(Bn);
        std::vector<std::size_t> Gn;
        for (std::size_t g : G) {
            const VTerm& lg = store[g].lead();
            if (lg.comp == lh.comp && lh.m.divides(lg.m)) continue;
            Gn.push_back(g);
        }
        Gn.push_back(h);
        G = std::move(Gn);
    };

    // Pointers are taken fresh each time since `store` may reallocate.
    auto active = [&]() {
        std::vector<const ModElem*> a;
        a.reserve(G.size());
        for (std::size_t g : G) a.push_back(&store[g]);
        return a;
    };
    auto active_cof = [&]() {
        std::vector<const ModElem*> a;
        if (!track) return a;
        for (std::size_t g : G) a.push_back(&scof[g]);
        return a;
    };

    for (std::size_t k = 0; k < gens.size(); ++k) {
        if (gens[k].size() != rank) throw ShapeMismatch("generator length differs from module rank");
        ModElem e = ModElem::from_vector(gens[k], ord);
        ModElem c = track ? ModElem::unit(static_cast<uint32_t>(k)) : ModElem();
        if (e.is_zero()) continue;
        auto Ga = active();
        auto Gc = active_cof();
        ModElem q;
        e = detail::reduce_ptr(std::move(e), Ga, ord, track ? &Gc : nullptr, track ? &q : nullptr);
        if (e.is_zero()) continue;
        if (track) c.sub_mul(1, Monomial{}, q, ord);
        e.make_monic(track ? &c : nullptr);
        store.push_back(std::move(e));
        scof.push_back(std::move(c));
        update(store.size() - 1);
    }

    while (!B.empty()) {
        auto best = std::min_element(B.begin(), B.end(), [&](const detail::SPair& a, const detail::SPair& b) {
            int da = a.lcm.degree(), db = b.lcm.degree();
            if (da != db) return da < db;
            int c = ord.cmp(a.comp, a.lcm, b.comp, b.lcm);
            if (c != 0) return c < 0;
            return a.serial < b.serial;
        });
        detail::SPair p = *best;
        B.erase(best);
        if (++gb.stats.spairs > opt.max_spairs)
            throw ResourceExceeded("Groebner S-pair cap of " + std::to_string(opt.max_spairs) + " exceeded");

        const ModElem& fi = store[p.i];
        const ModElem& fj = store[p.j];
        Monomial mi = p.lcm / fi.lead().m, mj = p.lcm / fj.lead().m;
        ModElem s;
        s.add_mul(1, mi, fi, ord);
        s.sub_mul(1, mj, fj, ord);
        ModElem c;
        if (track) {
            c.add_mul(1, mi, scof[p.i], ord);
            c.sub_mul(1, mj, scof[p.j], ord);
        }
        auto Ga = active();
        auto Gc = active_cof();
        ModElem q;
        s = detail::reduce_ptr(std::move(s), Ga, ord, track ? &Gc : nullptr, track ? &q : nullptr);
        if (s.is_zero()) {
            ++gb.stats.zero_reductions;
            continue;
        }
        if (track) c.sub_mul(1, Monomial{}, q, ord);
        s.make_monic(track ? &c : nullptr);
        store.push_back(std::move(s));
        scof.push_back(std::move(c));
        update(store.size() - 1);
    }

    // G is minimal; reduce the tails.
    std::vector<ModElem> basis, bcof;
    for (std::size_t g : G) {
        basis.push_back(store[g]);
        if (track) bcof.push_back(scof[g]);
    }
    std::vector<std::size_t> idx(basis.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const VTerm& x = basis[a].lead();
        const VTerm& y = basis[b].lead();
        return ord.cmp(x.comp, x.m, y.comp, y.m) > 0;
    });
    std::vector<ModElem> sorted, scofs;
    for (std::size_t k : idx) {
        sorted.push_back(std::move(basis[k]));
        if (track) scofs.push_back(std::move(bcof[k]));
    }
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        ModElem head;
        ModElem tail = sorted[k];
        tail.pop_lead_into(head);
        ModElem q;
        ModElem r = detail::reduce(std::move(tail), sorted, ord, track ? &scofs : nullptr, track ? &q : nullptr, k);
        ModElem full = head;
        full.add_mul(1, Monomial{}, r, ord);
        if (track) scofs[k].sub_mul(1, Monomial{}, q, ord);
        sorted[k] = std::move(full);
    }
    gb.elems = std::move(sorted);
    if (track) gb.cofactors = std::move(scofs);
    gb.stats.basis_size = gb.elems.size();
    return gb;
}

inline GroebnerBasis buchberger(const std::vector<Poly>& gens, const GroebnerOptions& opt = {}) {
    std::vector<PolyVector> v;
    v.reserve(gens.size());
    for (const auto& g : gens) v.push_back({g});
    return buchberger_module(v, 1, opt);
}

inline PolyVector normal_form(const PolyVector& p, const GroebnerBasis& gb) {
    if (p.size() != gb.rank) throw RingMismatch("vector rank differs from basis rank");
    return detail::reduce(ModElem::from_vector(p, gb.order), gb.elems, gb.order).to_vector(gb.rank);
}

inline Poly normal_form(const Poly& p, const GroebnerBasis& gb) {
    if (gb.rank != 1) throw RingMismatch("polynomial reduced against a module basis");
    return normal_form(PolyVector{p}, gb)[0];
}

struct CofactorCertificate {
    Poly target;
    std::vector<Poly> cofactors;
    std::vector<Poly> gens;

    bool verify() const {
        Poly s;
        for (std::size_t j = 0; j < gens.size(); ++j) s += cofactors[j] * gens[j];
        return s == target;
    }
};

// Module version: target = Σ c_j·gens_j with c_j polynomials.
struct ModuleCofactors {
    std::vector<Poly> cofactors;
};

inline std::optional<std::vector<Poly>> try_lift(const PolyVector& p, const GroebnerBasis& gb) {
    if (!gb.tracks_cofactors() && !gb.elems.empty()) throw InternalError("basis lacks cofactor bookkeeping");
    ModElem q;
    ModElem r = detail::reduce(ModElem::from_vector(p, gb.order), gb.elems, gb.order, &gb.cofactors, &q);
    if (!r.is_zero()) return std::nullopt;
    PolyVector v = q.to_vector(gb.ngens);
    return v;
}

inline CofactorCertificate member_with_cofactors(const Poly& p, const std::vector<Poly>& gens,
                                                 MonomialOrder order = MonomialOrder::DegRevLex) {
    GroebnerOptions opt;
    opt.order = order;
    opt.track_cofactors = true;
    GroebnerBasis gb = buchberger(gens, opt);
    CofactorCertificate cert;
    cert.target = p;
    cert.gens = gens;
    if (gb.elems.empty()) {
        if (!p.is_zero()) throw NotMember("polynomial is not in the zero ideal");
        cert.cofactors.assign(gens.size(), Poly());
        return cert;
    }
    auto lift = try_lift({p}, gb);
    if (!lift) throw NotMember("polynomial is not in the ideal (nonzero normal form)");
    cert.cofactors = std::move(*lift);
    if (!cert.verify()) throw InternalError("cofactor certificate does not re-expand to its target");
    return cert;
}

// Standard monomials of a zero-dimensional module basis, per component.
inline std::vector<std::pair<uint32_t, Monomial>> standard_monomials(const GroebnerBasis& gb, std::size_t nvars) {
    std::vector<std::pair<uint32_t, Monomial>> out;
    for (uint32_t comp = 0; comp < gb.rank; ++comp) {
        std::vector<Monomial> leads;
        for (const auto& e : gb.elems)
            if (e.lead().comp == comp) leads.push_back(e.lead().m);
        std::vector<int> bound(nvars, -1);
        bool one = false;
        for (const auto& m : leads) {
            if (m.is_one()) one = true;
            int nz = -1, cnt = 0;
            for (std::size_t i = 0; i < nvars; ++i)
                if (m.e[i] != 0) nz = static_cast<int>(i), ++cnt;
            if (cnt == 1 && (bound[nz] < 0 || m.e[nz] < bound[nz])) bound[nz] = m.e[nz];
        }
        if (one) continue;
        for (std::size_t i = 0; i < nvars; ++i)
            if (bound[i] < 0)
                throw NotZeroDimensional("quotient is infinite-dimensional (no pure power of variable " +
                                         std::to_string(i) + " in component " + std::to_string(comp) + ")");
        Monomial m;
        while (true) {
            bool standard = true;
            for (const auto& l : leads)
                if (l.divides(m)) {
                    standard = false;
                    break;
                }
            if (standard) out.push_back({comp, m});
            std::size_t i = 0;
            for (; i < nvars; ++i) {
                if (m.e[i] + 1 < bound[i]) {
                    ++m.e[i];
                    break;
                }
                m.e[i] = 0;
            }
            if (i == nvars) break;
        }
    }
    std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
        return gb.order.cmp(a.first, a.second, b.first, b.second) < 0;
    });
    return out;
}

inline std::vector<Monomial> quotient_basis(const GroebnerBasis& gb, std::size_t nvars) {
    if (gb.rank != 1) throw ShapeMismatch("quotient_basis expects an ideal basis");
    std::vector<Monomial> out;
    for (auto& [c, m] : standard_monomials(gb, nvars)) out.push_back(m);
    return out;
}

// Generators of ker(M : Q^c -> Q^r).
inline std::vector<PolyVector> module_kernel(const PolyMatrix& M, const GroebnerOptions& opt = {}) {
    std::size_t r = M.rows(), c = M.cols();
    std::vector<PolyVector> gens;
    for (std::size_t j = 0; j < c; ++j) {
        PolyVector v(r + c);
        for (std::size_t i = 0; i < r; ++i) v[i] = M(i, j);
        v[r + j] = Poly(1);
        gens.push_back(std::move(v));
    }
    GroebnerOptions o = opt;
    o.track_cofactors = false;
    GroebnerBasis gb = buchberger_module(gens, r + c, o);
    std::vector<PolyVector> ker;
    for (const auto& e : gb.elems) {
        if (e.lead().comp < r) continue;
        PolyVector full = e.to_vector(r + c);
        ker.emplace_back(full.begin() + static_cast<std::ptrdiff_t>(r), full.end());
    }
    return ker;
}

struct SubquotientReport {
    std::size_t dim = 0;
    GroebnerStats stats;
};

// dim_Q of <ker_gens> / <im_gens>, submodules of Q^rank.
inline SubquotientReport subquotient_report(const std::vector<PolyVector>& ker_gens,
                                            const std::vector<PolyVector>& im_gens, std::size_t rank,
                                            std::size_t nvars, const GroebnerOptions& opt = {}) {
    SubquotientReport rep;
    std::size_t s = ker_gens.size();
    if (s == 0) {
        for (const auto& v : im_gens)
            for (const auto& p : v)
                if (!p.is_zero()) throw NonContainment("image generator outside the zero kernel module");
        return rep;
    }
    PolyMatrix K(rank, s);
    for (std::size_t j = 0; j < s; ++j) {
        if (ker_gens[j].size() != rank) throw ShapeMismatch("kernel generator has wrong length");
        for (std::size_t i = 0; i < rank; ++i) K(i, j) = ker_gens[j][i];
    }
    std::vector<PolyVector> rel = module_kernel(K, opt);

    GroebnerOptions lo = opt;
    lo.track_cofactors = true;
    GroebnerBasis kgb = buchberger_module(ker_gens, rank, lo);
    rep.stats.spairs += kgb.stats.spairs;
    for (const auto& v : im_gens) {
        if (v.size() != rank) throw ShapeMismatch("image generator has wrong length");
        bool zero = std::all_of(v.begin(), v.end(), [](const Poly& p) { return p.is_zero(); });
        if (zero) continue;
        auto lift = kgb.elems.empty() ? std::nullopt : try_lift(v, kgb);
        if (!lift) throw NonContainment("image generator is not in the kernel module");
        rel.push_back(std::move(*lift));
    }
    GroebnerOptions qo = opt;
    qo.track_cofactors = false;
    GroebnerBasis qgb = buchberger_module(rel, s, qo);
    rep.stats.spairs += qgb.stats.spairs;
    rep.stats.basis_size = qgb.elems.size();
    try {
        rep.dim = standard_monomials(qgb, nvars).size();
    } catch (const NotZeroDimensional& e) {
        throw InfiniteDimension(std::string("subquotient is infinite-dimensional: ") + e.what());
    }
    return rep;
}

inline std::size_t subquotient_dim(const std::vector<PolyVector>& ker_gens, const std::vector<PolyVector>& im_gens,
                                   std::size_t rank, std::size_t nvars, const GroebnerOptions& opt = {}) {
    return subquotient_report(ker_gens, im_gens, rank, nvars, opt).dim;
}

inline std::vector<Poly> jacobian(const Poly& f, std::size_t nvars) {
    std::vector<Poly> J;
    for (std::size_t i = 0; i < nvars; ++i) J.push_back(f.partial(i));
    return J;
}

// Checks that f has an isolated critical point at the origin and no other
// critical points.  Returns the Milnor number.
inline std::size_t check_isolated_singularity(const Poly& f, std::size_t nvars, const GroebnerOptions& opt = {}) {
    if (nvars == 0) throw IsolatedSingularityError("no variables");
    if (sgn(f.constant_term()) != 0) throw IsolatedSingularityError("potential does not vanish at the origin");
    GroebnerBasis gb = buchberger(jacobian(f, nvars), opt);
    std::vector<Monomial> basis;
    try {
        basis = quotient_basis(gb, nvars);
    } catch (const NotZeroDimensional&) {
        throw IsolatedSingularityError("Milnor algebra Q/J(f) is infinite-dimensional");
    }
    std::size_t mu = basis.size();
    if (mu == 0) throw IsolatedSingularityError("origin is not a critical point (J(f) = Q)");
    for (std::size_t i = 0; i < nvars; ++i)
        if (!normal_form(Poly::var(i, static_cast<int>(mu)), gb).is_zero())
            throw IsolatedSingularityError("f has critical points away from the origin (x_" + std::to_string(i) +
                                           "^mu not in J(f))");
    return mu;
}

}  // namespace mfhrr
