#pragma once

#include <complex>
#include <vector>

#include "contactkit/errors.hpp"

namespace contactkit {

using Vec = std::vector<double>;

// Dense row-major matrix. Sizes in this toolkit never exceed ~10; all kernels
// below are written for that regime (direct methods, no blocking).
class Matrix {
  public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0);

    static Matrix identity(int n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    Vec row(int i) const;
    Vec col(int j) const;
    Matrix transposed() const;
    double max_abs() const;
    // Max absolute row sum.
    double inf_norm() const;

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

Matrix operator*(const Matrix& A, const Matrix& B);
Matrix operator+(const Matrix& A, const Matrix& B);
Matrix operator-(const Matrix& A, const Matrix& B);
Matrix operator*(double s, const Matrix& A);
Vec operator*(const Matrix& A, const Vec& x);

// Vector helpers (free functions; Vec is a plain std::vector).
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double inf_norm(const Vec& a);
Vec axpy(double alpha, const Vec& x, const Vec& y);  // alpha*x + y
Vec scaled(double alpha, const Vec& x);

struct RankTolerance {
    double absolute = 1e-10;
    double relative = 1e-8;
};

struct SpectrumResult {
    std::vector<std::complex<double>> eigenvalues;
    double tolerance_used = 0.0;
};

// Cofactor expansion for dim <= 3, LU with partial pivoting above.
double determinant(const Matrix& M);

// Explicit cofactors for dim <= 4; det * inverse via pivoted LU above, falling
// back to cofactors when |det| is below tolerance. adj of 1x1 is [[1]].
Matrix adjugate(const Matrix& M);

// Singular values by one-sided Jacobi, descending order.
Vec singular_values(const Matrix& M);

// Number of singular values exceeding tol.absolute + tol.relative * sigma_max.
int numerical_rank(const Matrix& M, const RankTolerance& tol = {});

// All eigenvalues with multiplicity, dim <= 10. Closed forms for dim <= 2,
// real Schur reduction via shifted QR above. Conjugate pairs appear together.
SpectrumResult eigenvalues(const Matrix& M);

// Moore-Penrose pseudo-inverse via the Jacobi SVD; singular values below
// tol.absolute + tol.relative * sigma_max are treated as zero.
Matrix pseudo_inverse(const Matrix& M, const RankTolerance& tol = {});

// Solves the square system A x = b by LU with partial pivoting.
Vec solve(const Matrix& A, const Vec& b);

// Orthonormal basis of the (right) nullspace of M at the given rank tolerance.
std::vector<Vec> nullspace(const Matrix& M, const RankTolerance& tol = {});

}  // namespace contactkit
