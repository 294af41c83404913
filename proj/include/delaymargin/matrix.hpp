#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "delaymargin/errors.hpp"

namespace delaymargin {

/// Dense real matrix, row-major. All entries must be finite.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    Matrix transpose() const;
    std::vector<std::vector<double>> to_rows() const;

    /// Throws ValidationError if any entry is non-finite.
    void check_finite(const char* who) const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double scale);

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }
    friend Matrix operator*(const Matrix& a, const Matrix& b);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using Vector = std::vector<double>;

Vector operator*(const Matrix& m, const Vector& v);

double max_abs(const Matrix& m);
double max_abs(const Vector& v);
double frobenius_norm(const Matrix& m);
double one_norm(const Matrix& m);
double euclidean_norm(const Vector& v);

/// LU factorization with partial pivoting of a square matrix.
class LuFactor {
public:
    explicit LuFactor(Matrix a);

    bool singular() const { return singular_; }
    double determinant() const;

    Vector solve(Vector rhs) const;
    Matrix solve(const Matrix& rhs) const;
    Matrix inverse() const;

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
    int sign_ = 1;
    bool singular_ = false;
};

/// Convenience wrapper: solves a x = b, throws NumericalError when singular.
Vector solve(const Matrix& a, const Vector& b);
Matrix solve(const Matrix& a, const Matrix& b);
Matrix inverse(const Matrix& a);

}  // namespace delaymargin
