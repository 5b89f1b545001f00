#pragma once

#include <bitset>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <vector>

#include "flpl/error.hpp"

namespace flpl {

namespace detail {

// True if set `a` precedes set `b` lexicographically when both are read as
// ascending index sequences: the set containing the lowest differing index
// wins.
inline bool lex_before(const std::bitset<64>& a, const std::bitset<64>& b) {
    for (int i = 0; i < 64; ++i) {
        if (a[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(i)])
            return a[static_cast<std::size_t>(i)];
    }
    return false;
}

} // namespace detail

// 0/1 selection of benign models: keep as many as possible subject to the
// total-distance budget, breaking count ties by minimal total distance and
// remaining ties by the lexicographically lowest index set. Count-indexed
// dynamic program over exact distances, so the result always matches
// exhaustive search.
inline std::vector<int> select_benign_knapsack(const std::vector<double>& distances, double budget) {
    const int n = static_cast<int>(distances.size());
    detail::require(n <= 64, "select_benign_knapsack: at most 64 candidates supported");
    for (double d : distances) detail::require(d >= 0.0, "select_benign_knapsack: negative distance");

    std::vector<int> selection(static_cast<std::size_t>(n), 0);
    if (budget <= 0.0) {
        std::cerr << "warning: select_benign_knapsack: non-positive budget, selecting nothing\n";
        return selection;
    }

    struct Cell {
        double total = std::numeric_limits<double>::infinity();
        std::bitset<64> members;
    };
    // best[c] = cheapest (then lexicographically lowest) set of c items.
    std::vector<Cell> best(static_cast<std::size_t>(n) + 1);
    best[0].total = 0.0;

    for (int i = 0; i < n; ++i) {
        for (int c = i; c >= 0; --c) {
            const Cell& src = best[static_cast<std::size_t>(c)];
            if (!std::isfinite(src.total)) continue;
            const double cand_total = src.total + distances[static_cast<std::size_t>(i)];
            Cell& dst = best[static_cast<std::size_t>(c) + 1];
            std::bitset<64> cand_members = src.members;
            cand_members.set(static_cast<std::size_t>(i));
            if (cand_total < dst.total ||
                (cand_total == dst.total && detail::lex_before(cand_members, dst.members))) {
                dst.total = cand_total;
                dst.members = cand_members;
            }
        }
    }

    for (int c = n; c >= 1; --c) {
        if (best[static_cast<std::size_t>(c)].total <= budget) {
            for (int i = 0; i < n; ++i)
                selection[static_cast<std::size_t>(i)] = best[static_cast<std::size_t>(c)].members[static_cast<std::size_t>(i)] ? 1 : 0;
            break;
        }
    }
    return selection;
}

} // namespace flpl
