#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "asrfeat/errors.hpp"

namespace asrfeat {

struct DtwResult {
    double distance = 0.0;
    // Monotone warping path from (0,0) to (m-1,n-1); steps in {(1,0),(0,1),(1,1)}.
    std::vector<std::pair<std::size_t, std::size_t>> path;
};

// Classic dynamic time warping with absolute-difference point distance, no
// window, no normalization. Backtrace tie-break: diagonal, then vertical
// (advance in `a`), then horizontal.
inline DtwResult dtw_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw ValidationError("dtw_distance: sequences must be non-empty");
    const std::size_t m = a.size();
    const std::size_t n = b.size();

    std::vector<double> acc(m * n);
    auto at = [n](std::size_t i, std::size_t j) { return i * n + j; };
    auto point = [&](std::size_t i, std::size_t j) { return std::fabs(a[i] - b[j]); };

    acc[at(0, 0)] = point(0, 0);
    for (std::size_t i = 1; i < m; ++i) acc[at(i, 0)] = acc[at(i - 1, 0)] + point(i, 0);
    for (std::size_t j = 1; j < n; ++j) acc[at(0, j)] = acc[at(0, j - 1)] + point(0, j);
    for (std::size_t i = 1; i < m; ++i) {
        for (std::size_t j = 1; j < n; ++j) {
            double best = acc[at(i - 1, j - 1)];
            if (acc[at(i - 1, j)] < best) best = acc[at(i - 1, j)];
            if (acc[at(i, j - 1)] < best) best = acc[at(i, j - 1)];
            acc[at(i, j)] = best + point(i, j);
        }
    }

    DtwResult out;
    out.distance = acc[at(m - 1, n - 1)];
    std::size_t i = m - 1, j = n - 1;
    out.path.emplace_back(i, j);
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0) {
            double best = acc[at(i - 1, j - 1)];
            if (acc[at(i - 1, j)] < best) best = acc[at(i - 1, j)];
            if (acc[at(i, j - 1)] < best) best = acc[at(i, j - 1)];
            if (acc[at(i - 1, j - 1)] == best) {
                --i; --j;
            } else if (acc[at(i - 1, j)] == best) {
                --i;
            } else {
                --j;
            }
        } else if (i > 0) {
            --i;
        } else {
            --j;
        }
        out.path.emplace_back(i, j);
    }
    std::reverse(out.path.begin(), out.path.end());
    return out;
}

}  // namespace asrfeat
