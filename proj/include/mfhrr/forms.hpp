#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mfhrr/poly.hpp"

namespace mfhrr {

using FormMask = uint32_t;  // bit i set <=> dx_i present

inline int popcount(FormMask m) { return std::popcount(m); }

// Sign of dx_A ∧ dx_B in terms of dx_{A∪B} (A, B disjoint).
inline int wedge_sign(FormMask a, FormMask b) {
    int inv = 0;
    for (FormMask bb = b; bb; bb &= bb - 1) {
        int j = std::countr_zero(bb);
        inv += std::popcount(a >> (j + 1));
    }
    return (inv & 1) ? -1 : 1;
}

// Polynomial-coefficient exterior form Σ p_S dx_S.
class DiffForm {
public:
    DiffForm() = default;
    DiffForm(const Poly& p) { add(0, p); }  // NOLINT(google-explicit-constructor)
    static DiffForm dx(std::size_t i) {
        if (i >= kMaxVars) throw IndexError("variable index out of range");
        DiffForm w;
        w.comps_[FormMask{1} << i] = Poly(1);
        return w;
    }
    static DiffForm component(FormMask s, const Poly& p) {
        DiffForm w;
        w.add(s, p);
        return w;
    }

    const std::map<FormMask, Poly>& components() const { return comps_; }
    bool is_zero() const { return comps_.empty(); }
    Poly coefficient(FormMask s) const {
        auto it = comps_.find(s);
        return it == comps_.end() ? Poly() : it->second;
    }

    void add(FormMask s, const Poly& p) {
        if (p.is_zero()) return;
        auto [it, inserted] = comps_.try_emplace(s, p);
        if (!inserted) {
            it->second += p;
            if (it->second.is_zero()) comps_.erase(it);
        }
    }

    // Homogeneous part of form degree k.
    DiffForm degree_part(int k) const {
        DiffForm r;
        for (const auto& [s, p] : comps_)
            if (popcount(s) == k) r.comps_.emplace(s, p);
        return r;
    }
    // -1 if zero, otherwise the maximal form degree present.
    int max_degree() const {
        int d = -1;
        for (const auto& [s, p] : comps_) d = std::max(d, popcount(s));
        return d;
    }
    bool is_homogeneous(int* deg = nullptr) const {
        int d = -1;
        for (const auto& [s, p] : comps_) {
            if (d >= 0 && popcount(s) != d) return false;
            d = popcount(s);
        }
        if (deg) *deg = d;
        return true;
    }

    DiffForm operator-() const {
        DiffForm r = *this;
        for (auto& [s, p] : r.comps_) p = -p;
        return r;
    }
    friend DiffForm operator+(DiffForm a, const DiffForm& b) {
        for (const auto& [s, p] : b.comps_) a.add(s, p);
        return a;
    }
    friend DiffForm operator-(DiffForm a, const DiffForm& b) {
        for (const auto& [s, p] : b.comps_) a.add(s, -p);
        return a;
    }
    DiffForm& operator+=(const DiffForm& b) {
        for (const auto& [s, p] : b.comps_) add(s, p);
        return *this;
    }
    DiffForm& operator-=(const DiffForm& b) {
        for (const auto& [s, p] : b.comps_) add(s, -p);
        return *this;
    }
    friend DiffForm operator*(const Poly& c, const DiffForm& w) {
        DiffForm r;
        if (c.is_zero()) return r;
        for (const auto& [s, p] : w.comps_) r.add(s, c * p);
        return r;
    }
    DiffForm scaled(const Rational& c) const {
        DiffForm r;
        if (sgn(c) == 0) return r;
        for (const auto& [s, p] : comps_) r.comps_.emplace(s, p.scaled(c));
        return r;
    }

    friend DiffForm wedge(const DiffForm& a, const DiffForm& b) {
        DiffForm r;
        for (const auto& [s, p] : a.comps_)
            for (const auto& [t, q] : b.comps_) {
                if (s & t) continue;
                Poly pq = p * q;
                r.add(s | t, wedge_sign(s, t) > 0 ? pq : -pq);
            }
        return r;
    }

    // de Rham differential over the first nvars variables.
    DiffForm d(std::size_t nvars) const {
        if (nvars > kMaxVars) throw IndexError("variable count out of range");
        DiffForm r;
        for (const auto& [s, p] : comps_)
            for (std::size_t i = 0; i < nvars; ++i) {
                FormMask bit = FormMask{1} << i;
                if (s & bit) continue;
                Poly dp = p.partial(i);
                if (dp.is_zero()) continue;
                r.add(s | bit, wedge_sign(bit, s) > 0 ? dp : -dp);
            }
        return r;
    }

    friend bool operator==(const DiffForm& a, const DiffForm& b) { return a.comps_ == b.comps_; }
    friend bool operator!=(const DiffForm& a, const DiffForm& b) { return !(a == b); }

    std::string format(const Ring& ring) const {
        if (comps_.empty()) return "0";
        std::string out;
        for (const auto& [s, p] : comps_) {
            if (!out.empty()) out += " + ";
            out += "(" + ring.format(p) + ")";
            for (std::size_t i = 0; i < kMaxVars; ++i)
                if (s & (FormMask{1} << i)) out += "*d" + ring.name(i);
        }
        return out;
    }

private:
    std::map<FormMask, Poly> comps_;
};

inline DiffForm deRham(const DiffForm& w, std::size_t nvars) { return w.d(nvars); }

// df as a 1-form.
inline DiffForm exterior_d(const Poly& f, std::size_t nvars) { return DiffForm(f).d(nvars); }

// Truncated series Σ_{k<U} ω_k u^k.
class FormSeries {
public:
    static constexpr std::size_t kDefaultTruncation = 8;

    explicit FormSeries(std::size_t truncation = kDefaultTruncation) : coeffs_(truncation) {}
    FormSeries(std::size_t truncation, const DiffForm& constant) : coeffs_(truncation) {
        if (truncation > 0) coeffs_[0] = constant;
    }

    std::size_t truncation() const { return coeffs_.size(); }
    const DiffForm& operator[](std::size_t k) const { return coeffs_.at(k); }
    DiffForm& operator[](std::size_t k) { return coeffs_.at(k); }
    const std::vector<DiffForm>& coeffs() const { return coeffs_; }

    bool is_zero() const {
        for (const auto& c : coeffs_)
            if (!c.is_zero()) return false;
        return true;
    }

    friend FormSeries operator+(const FormSeries& a, const FormSeries& b) {
        check_same(a, b);
        FormSeries r = a;
        for (std::size_t k = 0; k < a.truncation(); ++k) r.coeffs_[k] += b.coeffs_[k];
        return r;
    }
    friend FormSeries operator-(const FormSeries& a, const FormSeries& b) {
        check_same(a, b);
        FormSeries r = a;
        for (std::size_t k = 0; k < a.truncation(); ++k) r.coeffs_[k] -= b.coeffs_[k];
        return r;
    }
    FormSeries operator-() const {
        FormSeries r = *this;
        for (auto& c : r.coeffs_) c = -c;
        return r;
    }
    // Cauchy product with wedge, truncated at U.
    friend FormSeries operator*(const FormSeries& a, const FormSeries& b) {
        check_same(a, b);
        std::size_t u = a.truncation();
        FormSeries r(u);
        for (std::size_t i = 0; i < u; ++i) {
            if (a.coeffs_[i].is_zero()) continue;
            for (std::size_t j = 0; i + j < u; ++j) r.coeffs_[i + j] += wedge(a.coeffs_[i], b.coeffs_[j]);
        }
        return r;
    }
    FormSeries scaled(const Rational& c) const {
        FormSeries r = *this;
        for (auto& w : r.coeffs_) w = w.scaled(c);
        return r;
    }

    // ω ↦ sign·df∧ω + u·dω.
    FormSeries twist_diff(const Poly& f, std::size_t nvars, int sign = -1) const {
        DiffForm df = exterior_d(f, nvars);
        if (sign < 0) df = -df;
        std::size_t u = truncation();
        FormSeries r(u);
        for (std::size_t k = 0; k < u; ++k) {
            r.coeffs_[k] = wedge(df, coeffs_[k]);
            if (k > 0) r.coeffs_[k] += coeffs_[k - 1].d(nvars);
        }
        return r;
    }

    friend bool operator==(const FormSeries& a, const FormSeries& b) { return a.coeffs_ == b.coeffs_; }

private:
    std::vector<DiffForm> coeffs_;

    static void check_same(const FormSeries& a, const FormSeries& b) {
        if (a.truncation() != b.truncation())
            throw TruncationMismatch("u-series truncation orders differ (" + std::to_string(a.truncation()) +
                                     " vs " + std::to_string(b.truncation()) + ")");
    }
};

}  // namespace mfhrr
