#include "contactkit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace contactkit {

namespace {

constexpr int kMaxEigenDim = 10;

void require(bool cond, const char* msg) {
    if (!cond) throw DimensionError(msg);
}

// LU decomposition with partial pivoting. Returns false on exact breakdown
// (a zero pivot column), in which case det is 0.
struct LU {
    Matrix lu;
    std::vector<int> perm;
    int sign = 1;
    bool singular = false;
};

LU lu_factor(const Matrix& M) {
    const int n = M.rows();
    LU f{M, std::vector<int>(n), 1, false};
    for (int i = 0; i < n; ++i) f.perm[i] = i;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::fabs(f.lu(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::fabs(f.lu(i, k));
            if (v > best) { best = v; piv = i; }
        }
        if (best == 0.0) { f.singular = true; continue; }
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
            std::swap(f.perm[k], f.perm[piv]);
            f.sign = -f.sign;
        }
        for (int i = k + 1; i < n; ++i) {
            f.lu(i, k) /= f.lu(k, k);
            for (int j = k + 1; j < n; ++j) f.lu(i, j) -= f.lu(i, k) * f.lu(k, j);
        }
    }
    return f;
}

Vec lu_solve(const LU& f, const Vec& b) {
    const int n = f.lu.rows();
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = b[f.perm[i]];
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
        x[i] /= f.lu(i, i);
    }
    return x;
}

double lu_det(const LU& f) {
    if (f.singular) return 0.0;
    double d = f.sign;
    for (int i = 0; i < f.lu.rows(); ++i) d *= f.lu(i, i);
    return d;
}

Matrix minor_of(const Matrix& M, int row, int col) {
    Matrix S(M.rows() - 1, M.cols() - 1);
    for (int i = 0, si = 0; i < M.rows(); ++i) {
        if (i == row) continue;
        for (int j = 0, sj = 0; j < M.cols(); ++j) {
            if (j == col) continue;
            S(si, sj) = M(i, j);
            ++sj;
        }
        ++si;
    }
    return S;
}

Matrix adjugate_by_cofactors(const Matrix& M) {
    const int n = M.rows();
    Matrix adj(n, n);
    if (n == 1) {
        adj(0, 0) = 1.0;
        return adj;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double c = determinant(minor_of(M, i, j));
            adj(j, i) = (((i + j) % 2) ? -c : c);
        }
    return adj;
}

// One-sided Jacobi on the columns of A (rows >= cols required). At
// convergence A V has orthogonal columns whose norms are the singular values.
// V is accumulated when requested.
void jacobi_sweeps(Matrix& A, Matrix* V) {
    const int n = A.cols();
    const int m = A.rows();
    const double eps = std::numeric_limits<double>::epsilon();
    if (V) *V = Matrix::identity(n);
    const double tol = m * eps;
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool changed = false;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                double app = 0, aqq = 0, apq = 0;
                for (int i = 0; i < m; ++i) {
                    app += A(i, p) * A(i, p);
                    aqq += A(i, q) * A(i, q);
                    apq += A(i, p) * A(i, q);
                }
                if (app * aqq == 0.0) continue;  // a column underflowed to zero
                if (std::fabs(apq) <= tol * std::sqrt(app * aqq)) continue;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < m; ++i) {
                    const double ap = A(i, p), aq = A(i, q);
                    const double np = c * ap - s * aq;
                    const double nq = s * ap + c * aq;
                    changed = changed || np != ap || nq != aq;
                    A(i, p) = np;
                    A(i, q) = nq;
                }
                if (V)
                    for (int i = 0; i < n; ++i) {
                        const double vp = (*V)(i, p), vq = (*V)(i, q);
                        (*V)(i, p) = c * vp - s * vq;
                        (*V)(i, q) = s * vp + c * vq;
                    }
            }
        if (!changed) return;
    }
    throw NumericalError("one-sided Jacobi SVD did not converge");
}

struct SVD {
    Vec sigma;   // descending, always cols entries
    Matrix U;    // rows x cols (economy, orthonormal columns up to rank)
    Matrix V;    // cols x cols (full right singular basis)
};

// SVD of M via one-sided column Jacobi. Wide matrices are zero-padded with
// extra rows; column rotations preserve zero rows, so the top block of the
// padded U is a valid economy U of M and V stays complete (needed for
// nullspace extraction).
SVD svd_decompose(const Matrix& M) {
    const int rows = M.rows();
    const int cols = M.cols();
    const int m = std::max(rows, cols);
    Matrix A(m, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) A(i, j) = M(i, j);
    Matrix V;
    jacobi_sweeps(A, &V);
    std::vector<std::pair<double, int>> order(cols);
    for (int j = 0; j < cols; ++j) {
        double s = 0;
        for (int i = 0; i < m; ++i) s += A(i, j) * A(i, j);
        order[j] = {std::sqrt(s), j};
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    SVD out;
    out.sigma.resize(cols);
    out.U = Matrix(rows, cols);
    out.V = Matrix(cols, cols);
    for (int k = 0; k < cols; ++k) {
        const auto [s, j] = order[k];
        out.sigma[k] = s;
        for (int i = 0; i < rows; ++i) out.U(i, k) = (s > 0 ? A(i, j) / s : 0.0);
        for (int i = 0; i < cols; ++i) out.V(i, k) = V(i, j);
    }
    return out;
}

// --- eigenvalue kernel: Hessenberg reduction + Francis double-shift QR ---

void hessenberg(Matrix& H) {
    const int n = H.rows();
    for (int k = 0; k < n - 2; ++k) {
        double scale = 0;
        for (int i = k + 1; i < n; ++i) scale += std::fabs(H(i, k));
        if (scale == 0.0) continue;
        Vec v(n, 0.0);
        double norm = 0;
        for (int i = k + 1; i < n; ++i) {
            v[i] = H(i, k) / scale;
            norm += v[i] * v[i];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        if (v[k + 1] < 0) norm = -norm;
        v[k + 1] += norm;
        double vtv = 0;
        for (int i = k + 1; i < n; ++i) vtv += v[i] * v[i];
        if (vtv == 0.0) continue;
        // H <- P H P with P = I - 2 v v^T / (v^T v)
        for (int j = 0; j < n; ++j) {
            double s = 0;
            for (int i = k + 1; i < n; ++i) s += v[i] * H(i, j);
            s *= 2.0 / vtv;
            for (int i = k + 1; i < n; ++i) H(i, j) -= s * v[i];
        }
        for (int i = 0; i < n; ++i) {
            double s = 0;
            for (int j = k + 1; j < n; ++j) s += H(i, j) * v[j];
            s *= 2.0 / vtv;
            for (int j = k + 1; j < n; ++j) H(i, j) -= s * v[j];
        }
    }
}

void eig2x2(double a, double b, double c, double d,
            std::vector<std::complex<double>>& out) {
    const double tr = a + d;
    const double det = a * d - b * c;
    const double disc = tr * tr / 4.0 - det;
    if (disc >= 0) {
        const double root = std::sqrt(disc);
        // Stable pairing: the larger-magnitude root first, companion via det.
        double l1 = tr / 2.0 + (tr >= 0 ? root : -root);
        double l2 = (l1 != 0.0) ? det / l1 : tr / 2.0 - (tr >= 0 ? root : -root);
        out.emplace_back(l1, 0.0);
        out.emplace_back(l2, 0.0);
    } else {
        const double im = std::sqrt(-disc);
        out.emplace_back(tr / 2.0, im);
        out.emplace_back(tr / 2.0, -im);
    }
}

std::vector<std::complex<double>> schur_eigenvalues(Matrix H) {
    const int n = H.rows();
    std::vector<std::complex<double>> eig;
    eig.reserve(n);
    hessenberg(H);
    const double eps = std::numeric_limits<double>::epsilon();
    int hi = n - 1;
    int iters_at_block = 0;
    const int max_iters = 50 * n + 100;
    int total_iters = 0;
    while (hi >= 0) {
        // Deflate negligible subdiagonals.
        int lo = hi;
        while (lo > 0) {
            const double s = std::fabs(H(lo - 1, lo - 1)) + std::fabs(H(lo, lo));
            if (std::fabs(H(lo, lo - 1)) <= eps * (s > 0 ? s : 1.0)) {
                H(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }
        if (lo == hi) {
            eig.emplace_back(H(hi, hi), 0.0);
            --hi;
            iters_at_block = 0;
            continue;
        }
        if (lo == hi - 1) {
            eig2x2(H(lo, lo), H(lo, hi), H(hi, lo), H(hi, hi), eig);
            hi -= 2;
            iters_at_block = 0;
            continue;
        }
        if (++total_iters > max_iters)
            throw NumericalError("QR eigenvalue iteration did not converge");
        // Francis double shift from the trailing 2x2; exceptional shift
        // every 10 stalled iterations.
        double s, p;
        if (++iters_at_block % 11 == 10) {
            const double w = std::fabs(H(hi, hi - 1)) + std::fabs(H(hi - 1, hi - 2));
            s = 1.5 * w;
            p = w * w;
        } else {
            s = H(hi - 1, hi - 1) + H(hi, hi);
            p = H(hi - 1, hi - 1) * H(hi, hi) - H(hi - 1, hi) * H(hi, hi - 1);
        }
        double x = H(lo, lo) * H(lo, lo) + H(lo, lo + 1) * H(lo + 1, lo) -
                   s * H(lo, lo) + p;
        double y = H(lo + 1, lo) * (H(lo, lo) + H(lo + 1, lo + 1) - s);
        double z = H(lo + 2, lo + 1) * H(lo + 1, lo);
        for (int k = lo; k <= hi - 1; ++k) {
            // Householder on (x,y,z) and bulge chase.
            double alpha = std::sqrt(x * x + y * y + z * z);
            if (alpha == 0.0) break;
            if (x > 0) alpha = -alpha;
            const double v0 = x - alpha, v1 = y, v2 = z;
            const double vtv = v0 * v0 + v1 * v1 + v2 * v2;
            if (vtv > 0) {
                const int last = std::min(k + 2, hi);
                const int nrowsv = last - k + 1;  // 2 or 3
                const double vv[3] = {v0, v1, v2};
                const int jstart = std::max(lo, k - 1);
                for (int j = jstart; j < n; ++j) {
                    double acc = 0;
                    for (int i = 0; i < nrowsv; ++i) acc += vv[i] * H(k + i, j);
                    acc *= 2.0 / vtv;
                    for (int i = 0; i < nrowsv; ++i) H(k + i, j) -= acc * vv[i];
                }
                const int iend = std::min(hi, k + 3);
                for (int i = 0; i <= iend; ++i) {
                    double acc = 0;
                    for (int j = 0; j < nrowsv; ++j) acc += H(i, k + j) * vv[j];
                    acc *= 2.0 / vtv;
                    for (int j = 0; j < nrowsv; ++j) H(i, k + j) -= acc * vv[j];
                }
            }
            if (k < hi - 1) {
                x = H(k + 1, k);
                y = H(k + 2, k);
                z = (k + 3 <= hi) ? H(k + 3, k) : 0.0;
            }
        }
    }
    return eig;
}

}  // namespace

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {
    require(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
}

Matrix Matrix::identity(int n) {
    Matrix I(n, n);
    for (int i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const int r = static_cast<int>(rows.size());
    const int c = static_cast<int>(rows.begin()->size());
    Matrix M(r, c);
    int i = 0;
    for (const auto& row : rows) {
        require(static_cast<int>(row.size()) == c, "ragged row list");
        int j = 0;
        for (double v : row) M(i, j++) = v;
        ++i;
    }
    return M;
}

Vec Matrix::row(int i) const {
    Vec r(cols_);
    for (int j = 0; j < cols_; ++j) r[j] = (*this)(i, j);
    return r;
}

Vec Matrix::col(int j) const {
    Vec c(rows_);
    for (int i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
}

Matrix Matrix::transposed() const {
    Matrix T(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) T(j, i) = (*this)(i, j);
    return T;
}

double Matrix::max_abs() const {
    double m = 0;
    for (double v : a_) m = std::max(m, std::fabs(v));
    return m;
}

double Matrix::inf_norm() const {
    double m = 0;
    for (int i = 0; i < rows_; ++i) {
        double s = 0;
        for (int j = 0; j < cols_; ++j) s += std::fabs((*this)(i, j));
        m = std::max(m, s);
    }
    return m;
}

Matrix operator*(const Matrix& A, const Matrix& B) {
    require(A.cols() == B.rows(), "matmul shape mismatch");
    Matrix C(A.rows(), B.cols());
    for (int i = 0; i < A.rows(); ++i)
        for (int k = 0; k < A.cols(); ++k) {
            const double aik = A(i, k);
            for (int j = 0; j < B.cols(); ++j) C(i, j) += aik * B(k, j);
        }
    return C;
}

Matrix operator+(const Matrix& A, const Matrix& B) {
    require(A.rows() == B.rows() && A.cols() == B.cols(), "matrix add shape mismatch");
    Matrix C = A;
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j) C(i, j) += B(i, j);
    return C;
}

Matrix operator-(const Matrix& A, const Matrix& B) {
    require(A.rows() == B.rows() && A.cols() == B.cols(), "matrix sub shape mismatch");
    Matrix C = A;
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j) C(i, j) -= B(i, j);
    return C;
}

Matrix operator*(double s, const Matrix& A) {
    Matrix C = A;
    for (double& v : C.data()) v *= s;
    return C;
}

Vec operator*(const Matrix& A, const Vec& x) {
    require(A.cols() == static_cast<int>(x.size()), "matvec shape mismatch");
    Vec y(A.rows(), 0.0);
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j) y[i] += A(i, j) * x[j];
    return y;
}

double dot(const Vec& a, const Vec& b) {
    require(a.size() == b.size(), "dot shape mismatch");
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double inf_norm(const Vec& a) {
    double m = 0;
    for (double v : a) m = std::max(m, std::fabs(v));
    return m;
}

Vec axpy(double alpha, const Vec& x, const Vec& y) {
    require(x.size() == y.size(), "axpy shape mismatch");
    Vec r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = alpha * x[i] + y[i];
    return r;
}

Vec scaled(double alpha, const Vec& x) {
    Vec r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = alpha * x[i];
    return r;
}

double determinant(const Matrix& M) {
    require(M.rows() == M.cols(), "determinant requires a square matrix");
    const int n = M.rows();
    switch (n) {
        case 1:
            return M(0, 0);
        case 2:
            return M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
        case 3:
            return M(0, 0) * (M(1, 1) * M(2, 2) - M(1, 2) * M(2, 1)) -
                   M(0, 1) * (M(1, 0) * M(2, 2) - M(1, 2) * M(2, 0)) +
                   M(0, 2) * (M(1, 0) * M(2, 1) - M(1, 1) * M(2, 0));
        default:
            return lu_det(lu_factor(M));
    }
}

Matrix adjugate(const Matrix& M) {
    require(M.rows() == M.cols(), "adjugate requires a square matrix");
    const int n = M.rows();
    if (n <= 4) return adjugate_by_cofactors(M);
    const LU f = lu_factor(M);
    const double det = lu_det(f);
    // Near-singular matrices are exactly where the adjugate is needed, and
    // det*inverse loses them; fall back to cofactors there.
    if (std::fabs(det) < 1e-10 * std::max(1.0, std::pow(M.inf_norm(), n)))
        return adjugate_by_cofactors(M);
    Matrix adj(n, n);
    Vec e(n, 0.0);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        const Vec x = lu_solve(f, e);
        e[j] = 0.0;
        for (int i = 0; i < n; ++i) adj(i, j) = det * x[i];
    }
    return adj;
}

Vec singular_values(const Matrix& M) {
    return svd_decompose(M).sigma;
}

int numerical_rank(const Matrix& M, const RankTolerance& tol) {
    const Vec s = singular_values(M);
    const double smax = s.empty() ? 0.0 : s[0];
    const double cut = tol.absolute + tol.relative * smax;
    int r = 0;
    for (double v : s)
        if (v > cut) ++r;
    return r;
}

SpectrumResult eigenvalues(const Matrix& M) {
    require(M.rows() == M.cols(), "eigenvalues require a square matrix");
    require(M.rows() <= kMaxEigenDim, "eigenvalue kernel capped at dim 10");
    for (double v : M.data())
        if (!std::isfinite(v)) throw EvaluationError("non-finite matrix entry");
    SpectrumResult out;
    out.tolerance_used = std::numeric_limits<double>::epsilon() * M.inf_norm();
    const int n = M.rows();
    if (n == 1) {
        out.eigenvalues.emplace_back(M(0, 0), 0.0);
        return out;
    }
    if (n == 2) {
        eig2x2(M(0, 0), M(0, 1), M(1, 0), M(1, 1), out.eigenvalues);
        return out;
    }
    out.eigenvalues = schur_eigenvalues(M);
    return out;
}

Matrix pseudo_inverse(const Matrix& M, const RankTolerance& tol) {
    const SVD d = svd_decompose(M);
    const double smax = d.sigma.empty() ? 0.0 : d.sigma[0];
    const double cut = tol.absolute + tol.relative * smax;
    const int r = static_cast<int>(d.sigma.size());
    Matrix P(M.cols(), M.rows());
    for (int k = 0; k < r; ++k) {
        if (d.sigma[k] <= cut) continue;
        const double inv = 1.0 / d.sigma[k];
        for (int i = 0; i < M.cols(); ++i)
            for (int j = 0; j < M.rows(); ++j)
                P(i, j) += d.V(i, k) * inv * d.U(j, k);
    }
    return P;
}

Vec solve(const Matrix& A, const Vec& b) {
    require(A.rows() == A.cols(), "solve requires a square matrix");
    require(A.rows() == static_cast<int>(b.size()), "solve shape mismatch");
    const LU f = lu_factor(A);
    if (f.singular) throw NumericalError("singular system in solve");
    return lu_solve(f, b);
}

std::vector<Vec> nullspace(const Matrix& M, const RankTolerance& tol) {
    const SVD d = svd_decompose(M);
    const double smax = d.sigma.empty() ? 0.0 : d.sigma[0];
    const double cut = tol.absolute + tol.relative * smax;
    std::vector<Vec> basis;
    for (int k = 0; k < static_cast<int>(d.sigma.size()); ++k)
        if (d.sigma[k] <= cut) basis.push_back(d.V.col(k));
    return basis;
}

}  // namespace contactkit
