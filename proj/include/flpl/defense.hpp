#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "flpl/error.hpp"
#include "flpl/mat.hpp"
#include "flpl/svm.hpp"

namespace flpl {

enum class DefenseMode { kObserve, kKrum, kMultiKrum };

inline const char* defense_mode_name(DefenseMode m) {
    switch (m) {
        case DefenseMode::kObserve: return "observe";
        case DefenseMode::kKrum: return "krum";
        case DefenseMode::kMultiKrum: return "multi_krum";
    }
    return "observe";
}

struct DetectionReport {
    int round = 0;
    std::map<int, double> per_model_distance; // model id -> distance to previous global
    std::map<int, double> krum_scores;        // empty in observe mode
    std::set<int> flagged;                    // model ids not kept by the filter
    DefenseMode filter_mode = DefenseMode::kObserve;
};

// Observe-only distance report against the previous round's global model.
inline DetectionReport distance_report(const std::vector<ModelWeights>& models, const GlobalModel& global_prev) {
    detail::require(!models.empty(), "distance_report: no models");
    DetectionReport report;
    report.round = global_prev.round + 1;
    for (std::size_t i = 0; i < models.size(); ++i)
        report.per_model_distance[static_cast<int>(i)] =
            euclidean_distance(models[i].flat, global_prev.weights.flat);
    return report;
}

// Krum scoring: score(i) = sum of squared distances to its n-f-2 nearest
// neighbours. Krum keeps the single argmin; multi-Krum keeps the m lowest
// scores. Ties resolve to the lower id.
inline std::pair<std::vector<int>, std::vector<double>> krum_select(const std::vector<ModelWeights>& models, int f,
                                                                    int multi_m) {
    const int n = static_cast<int>(models.size());
    if (n < 2 * f + 3)
        throw ConfigError("krum_select: need at least 2f+3 = " + std::to_string(2 * f + 3) + " models, got " +
                          std::to_string(n));
    detail::require(multi_m >= 1 && multi_m <= n, "krum_select: multi_m out of range");

    std::vector<std::vector<double>> sq(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = euclidean_distance(models[static_cast<std::size_t>(i)].flat,
                                                models[static_cast<std::size_t>(j)].flat);
            sq[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = d * d;
            sq[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = d * d;
        }
    }

    const int neighbours = std::max(0, n - f - 2);
    std::vector<double> scores(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        std::vector<double> dists;
        dists.reserve(static_cast<std::size_t>(n - 1));
        for (int j = 0; j < n; ++j)
            if (j != i) dists.push_back(sq[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        std::sort(dists.begin(), dists.end());
        for (int k = 0; k < neighbours; ++k) scores[static_cast<std::size_t>(i)] += dists[static_cast<std::size_t>(k)];
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return scores[static_cast<std::size_t>(a)] < scores[static_cast<std::size_t>(b)];
    });
    std::vector<int> selected(order.begin(), order.begin() + multi_m);
    std::sort(selected.begin(), selected.end());
    return {std::move(selected), std::move(scores)};
}

} // namespace flpl
