#pragma once

// Random nonnegative piecewise-constant weights for the operator property suites.

#include <algorithm>
#include <random>
#include <vector>

#include "philap/funcgrid.hpp"

namespace philap::examples {

struct RandomWeight {
    std::vector<double> breakpoints;
    std::vector<double> values;

    /// The weight plus `bumps[k]` on piece k (nothing when bumps is empty).
    PiecewiseSpec spec(const std::vector<double>& bumps = {}) const {
        PiecewiseSpec s;
        s.breakpoints = breakpoints;
        for (std::size_t k = 0; k < values.size(); ++k) {
            const double v = values[k] + (bumps.empty() ? 0.0 : bumps[k]);
            s.pieces.push_back(parse_expression(format_double(v)));
        }
        return s;
    }
};

/// Up to four breakpoints, at most one per slot of width 1/8 of (0, 1) so a
/// grid of 129 nodes resolves them; about 30% of the pieces vanish.
inline RandomWeight random_weight(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> count(0, 4);
    RandomWeight w;
    const int k = count(rng);
    std::vector<int> slots = {1, 2, 3, 4, 5, 6, 7};
    std::shuffle(slots.begin(), slots.end(), rng);
    for (int i = 0; i < k; ++i) w.breakpoints.push_back((slots[i] + 0.1 * unit(rng)) / 8.0);
    std::sort(w.breakpoints.begin(), w.breakpoints.end());
    bool nonzero = false;
    for (std::size_t i = 0; i <= w.breakpoints.size(); ++i) {
        const double v = unit(rng) < 0.3 ? 0.0 : 2.0 * unit(rng);
        nonzero = nonzero || v > 0.0;
        w.values.push_back(v);
    }
    if (!nonzero) w.values.back() = 1.0;
    return w;
}

/// Nonnegative per-piece increments, zero on about half of the pieces.
inline std::vector<double> random_bumps(std::mt19937_64& rng, std::size_t pieces) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> out;
    for (std::size_t k = 0; k < pieces; ++k) out.push_back(unit(rng) < 0.5 ? 0.0 : unit(rng));
    return out;
}

}  // namespace philap::examples
