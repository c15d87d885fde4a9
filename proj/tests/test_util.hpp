#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "bslab/numerics.hpp"

namespace test {

inline bslab::CMatrix random_complex(int rows, int cols, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g;
    bslab::CMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = bslab::cplx(g(gen), g(gen));
    return m;
}

inline bslab::CMatrix random_hermitian(int n, std::uint64_t seed)
{
    const bslab::CMatrix x = random_complex(n, n, seed);
    return 0.5 * (x + x.adjoint());
}

// Greedy matching distance between two multisets of equal size.
inline double multiset_distance(const bslab::CVector& a, const bslab::CVector& b)
{
    if (a.size() != b.size()) return 1e300;
    std::vector<bool> used(b.size(), false);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        double best = 1e300;
        Eigen::Index bj = -1;
        for (Eigen::Index j = 0; j < b.size(); ++j)
            if (!used[j] && std::abs(a(i) - b(j)) < best) {
                best = std::abs(a(i) - b(j));
                bj = j;
            }
        used[bj] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

inline double multiset_distance(const bslab::CVector& a, std::initializer_list<bslab::cplx> b)
{
    bslab::CVector v(static_cast<Eigen::Index>(b.size()));
    Eigen::Index i = 0;
    for (auto x : b) v(i++) = x;
    return multiset_distance(a, v);
}

} // namespace test
