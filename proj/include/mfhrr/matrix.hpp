#pragma once

#include <string>
#include <vector>

#include "mfhrr/poly.hpp"

namespace mfhrr {

// Dense row-major matrix over any ring-like element type.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    T& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
    T& at(std::size_t i, std::size_t j) {
        if (i >= rows_ || j >= cols_) throw IndexError("matrix index out of range");
        return (*this)(i, j);
    }
    const T& at(std::size_t i, std::size_t j) const {
        if (i >= rows_ || j >= cols_) throw IndexError("matrix index out of range");
        return (*this)(i, j);
    }

    bool is_zero() const {
        for (const auto& x : a_)
            if (!x.is_zero()) return false;
        return true;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix operator-() const {
        Matrix r = *this;
        for (auto& x : r.a_) x = -x;
        return r;
    }
    friend Matrix operator+(const Matrix& a, const Matrix& b) {
        check_same(a, b);
        Matrix r = a;
        for (std::size_t k = 0; k < r.a_.size(); ++k) r.a_[k] += b.a_[k];
        return r;
    }
    friend Matrix operator-(const Matrix& a, const Matrix& b) {
        check_same(a, b);
        Matrix r = a;
        for (std::size_t k = 0; k < r.a_.size(); ++k) r.a_[k] -= b.a_[k];
        return r;
    }
    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_)
            throw ShapeMismatch("cannot multiply " + a.shape() + " by " + b.shape());
        Matrix r(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T& x = a(i, k);
                if (x.is_zero()) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) {
                    const T& y = b(k, j);
                    if (!y.is_zero()) r(i, j) += x * y;
                }
            }
        return r;
    }
    friend Matrix operator*(const T& c, const Matrix& m) {
        Matrix r = m;
        for (auto& x : r.a_) x = c * x;
        return r;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
    }
    friend bool operator!=(const Matrix& a, const Matrix& b) { return !(a == b); }

    std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

    // Copies `b` into this matrix at offset (r0, c0).
    void set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
        if (r0 + b.rows_ > rows_ || c0 + b.cols_ > cols_) throw ShapeMismatch("block does not fit");
        for (std::size_t i = 0; i < b.rows_; ++i)
            for (std::size_t j = 0; j < b.cols_; ++j) (*this)(r0 + i, c0 + j) = b(i, j);
    }
    Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
        if (r0 + nr > rows_ || c0 + nc > cols_) throw ShapeMismatch("block out of range");
        Matrix r(nr, nc);
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t j = 0; j < nc; ++j) r(i, j) = (*this)(r0 + i, c0 + j);
        return r;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> a_;

    static void check_same(const Matrix& a, const Matrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw ShapeMismatch("matrix shapes differ: " + a.shape() + " vs " + b.shape());
    }
};

using PolyMatrix = Matrix<Poly>;
using PolyVector = std::vector<Poly>;

// Leibniz expansion; fine for the small sizes used in residue covers.
inline Poly determinant(const PolyMatrix& m) {
    if (m.rows() != m.cols()) throw ShapeMismatch("determinant of non-square matrix");
    std::size_t n = m.rows();
    if (n == 0) return Poly(1);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Poly det;
    do {
        int inv = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (perm[i] > perm[j]) ++inv;
        Poly t(1);
        for (std::size_t i = 0; i < n && !t.is_zero(); ++i) t *= m(i, perm[i]);
        if (inv & 1) det -= t;
        else det += t;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return det;
}

}  // namespace mfhrr
