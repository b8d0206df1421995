#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace thermstack {

/// Compressed sparse row matrix with sorted column indices per row.
struct SparseMatrix {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    std::size_t nnz() const { return val.size(); }

    double at(int i, int j) const {
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (col[k] == j) return val[k];
        return 0.0;
    }

    void multiply(const std::vector<double>& x, std::vector<double>& y) const {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
            y[static_cast<size_t>(i)] = s;
        }
    }

    /// Exact (bitwise) check of structural and numerical symmetry.
    bool is_symmetric() const {
        for (int i = 0; i < n; ++i) {
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
                const int j = col[k];
                if (j <= i) continue;
                if (at(j, i) != val[k]) return false;
            }
        }
        return true;
    }
};

struct BoundaryCoupling {
    int cell = 0;
    double conductance = 0.0; ///< W/K to ambient
};

/// Steady conduction system G·T = P. P carries the ambient boundary
/// contribution; source power is added by power_vector.
struct SparseSystem {
    SparseMatrix G;
    std::vector<double> P;
    double ambient = 0.0;
    std::vector<BoundaryCoupling> boundary;
};

/// Deterministic dot product: fixed 4096-element blocks summed sequentially,
/// block partials reduced in index order. Bit-identical for any thread count.
inline double det_dot(const std::vector<double>& a, const std::vector<double>& b) {
    constexpr std::size_t kBlock = 4096;
    const std::size_t n = a.size();
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long bi = 0; bi < static_cast<long long>(nblocks); ++bi) {
        const std::size_t begin = static_cast<std::size_t>(bi) * kBlock;
        const std::size_t end = std::min(begin + kBlock, n);
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += a[i] * b[i];
        partial[static_cast<std::size_t>(bi)] = s;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(det_dot(a, a)); }

} // namespace thermstack
