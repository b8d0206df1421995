#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermstack/sparse.hpp"

namespace thermstack {

class SolveError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct TemperatureField {
    std::vector<double> values; ///< K, aligned with mesh flat indices
    int iterations = 0;
    double residual = 0.0; ///< final ||G·T - P||₂
};

inline double residual_norm(const SparseSystem& sys, const std::vector<double>& t) {
    if (static_cast<int>(t.size()) != sys.G.n)
        throw std::invalid_argument("residual_norm: dimension mismatch");
    std::vector<double> r(t.size());
    sys.G.multiply(t, r);
    for (size_t i = 0; i < r.size(); ++i) r[i] = sys.P[i] - r[i];
    return norm2(r);
}

/// Jacobi-preconditioned conjugate gradient, initial guess T = ambient.
/// Converges when ||G·T - P||₂ <= rel_tol·||P||₂. Reductions use a fixed
/// blocked order, so results are bit-identical across thread counts.
inline TemperatureField solve_steady(const SparseSystem& sys, double rel_tol = 1e-8,
                                     int max_iter = 0) {
    const int n = sys.G.n;
    if (n <= 0) throw std::invalid_argument("solve_steady: empty system");
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw std::invalid_argument("solve_steady: rel_tol must be in (0,1)");
    if (max_iter <= 0)
        max_iter = static_cast<int>(50.0 * std::sqrt(static_cast<double>(n))) + 1;

    std::vector<double> inv_diag(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double d = sys.G.at(i, i);
        if (!(d > 0.0)) throw SolveError("nonpositive diagonal at row " + std::to_string(i));
        inv_diag[static_cast<size_t>(i)] = 1.0 / d;
    }

    TemperatureField field;
    std::vector<double>& x = field.values;
    x.assign(static_cast<size_t>(n), sys.ambient);

    std::vector<double> r(x.size()), z(x.size()), p(x.size()), q(x.size());
    sys.G.multiply(x, r);
    for (size_t i = 0; i < r.size(); ++i) r[i] = sys.P[i] - r[i];

    const double norm_p = norm2(sys.P);
    const double target = rel_tol * (norm_p > 0.0 ? norm_p : 1.0);

    double rnorm = norm2(r);
    if (rnorm <= target) {
        field.residual = rnorm;
        return field;
    }

    for (size_t i = 0; i < r.size(); ++i) z[i] = r[i] * inv_diag[i];
    p = z;
    double rz = det_dot(r, z);

    for (int it = 1; it <= max_iter; ++it) {
        sys.G.multiply(p, q);
        const double pq = det_dot(p, q);
        if (!(pq > 0.0) || std::isnan(pq))
            throw SolveError("system is not positive definite (p·Gp = " +
                             std::to_string(pq) + ")");
        const double alpha = rz / pq;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long i = 0; i < static_cast<long long>(x.size()); ++i) {
            x[static_cast<size_t>(i)] += alpha * p[static_cast<size_t>(i)];
            r[static_cast<size_t>(i)] -= alpha * q[static_cast<size_t>(i)];
        }
        rnorm = norm2(r);
        if (std::isnan(rnorm)) throw SolveError("NaN residual; invalid system");
        if (rnorm <= target) {
            field.iterations = it;
            field.residual = rnorm;
            return field;
        }
        for (size_t i = 0; i < z.size(); ++i) z[i] = r[i] * inv_diag[i];
        const double rz_new = det_dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long i = 0; i < static_cast<long long>(p.size()); ++i)
            p[static_cast<size_t>(i)] = z[static_cast<size_t>(i)] +
                                        beta * p[static_cast<size_t>(i)];
    }
    throw SolveError("no convergence in " + std::to_string(max_iter) +
                     " iterations (residual " + std::to_string(rnorm) + ", target " +
                     std::to_string(target) + ")");
}

constexpr int kDenseSolveGuard = 5000;

/// Direct LDLᵀ factorization solve; verification oracle for small systems.
inline TemperatureField solve_dense(const SparseSystem& sys) {
    const int n = sys.G.n;
    if (n <= 0) throw std::invalid_argument("solve_dense: empty system");
    if (n > kDenseSolveGuard)
        throw std::invalid_argument("solve_dense: system exceeds the " +
                                    std::to_string(kDenseSolveGuard) + "-cell guard");

    std::vector<double> a(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = sys.G.row_ptr[i]; k < sys.G.row_ptr[i + 1]; ++k)
            a[static_cast<size_t>(i) * n + sys.G.col[k]] = sys.G.val[k];

    // In-place LDLᵀ: strictly-lower triangle holds L, diagonal holds D.
    for (int j = 0; j < n; ++j) {
        double d = a[static_cast<size_t>(j) * n + j];
        for (int k = 0; k < j; ++k) {
            const double ljk = a[static_cast<size_t>(j) * n + k];
            d -= ljk * ljk * a[static_cast<size_t>(k) * n + k];
        }
        if (!(d > 0.0))
            throw SolveError("nonpositive pivot at column " + std::to_string(j) +
                             "; system is not positive definite");
        a[static_cast<size_t>(j) * n + j] = d;
        for (int i = j + 1; i < n; ++i) {
            double s = a[static_cast<size_t>(i) * n + j];
            for (int k = 0; k < j; ++k)
                s -= a[static_cast<size_t>(i) * n + k] *
                     a[static_cast<size_t>(j) * n + k] *
                     a[static_cast<size_t>(k) * n + k];
            a[static_cast<size_t>(i) * n + j] = s / d;
        }
    }

    TemperatureField field;
    std::vector<double>& x = field.values;
    x.assign(sys.P.begin(), sys.P.end());
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < i; ++k)
            x[static_cast<size_t>(i)] -= a[static_cast<size_t>(i) * n + k] *
                                         x[static_cast<size_t>(k)];
    for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] /= a[static_cast<size_t>(i) * n + i];
    for (int i = n - 1; i >= 0; --i)
        for (int k = i + 1; k < n; ++k)
            x[static_cast<size_t>(i)] -= a[static_cast<size_t>(k) * n + i] *
                                         x[static_cast<size_t>(k)];
    field.residual = residual_norm(sys, x);
    return field;
}

} // namespace thermstack
