#pragma once

#include <string>
#include <vector>

#include "flpl/error.hpp"
#include "flpl/svm.hpp"

namespace flpl {

// Data-size-weighted model averaging. The selection mask drops deselected
// benign models from both the numerator and the total data size; with no
// attackers and a full mask this reduces to plain FedAvg.
inline GlobalModel aggregate(const std::vector<ModelWeights>& benign, const std::vector<int>& sizes,
                             const std::vector<ModelWeights>& malicious, const std::vector<int>& claimed,
                             const std::vector<int>& selection, int round = 0) {
    detail::require(benign.size() == sizes.size() && benign.size() == selection.size(),
                    "aggregate: benign/sizes/selection lengths differ");
    detail::require(malicious.size() == claimed.size(), "aggregate: malicious/claimed lengths differ");
    detail::require(!benign.empty() || !malicious.empty(), "aggregate: no models at all");

    long total = 0;
    for (std::size_t i = 0; i < benign.size(); ++i)
        if (selection[i] != 0) total += sizes[i];
    for (int c : claimed) total += c;
    if (total <= 0)
        throw DegenerateAggregation("aggregate: every model deselected, total data size is zero");

    const ModelWeights& proto = benign.empty() ? malicious.front() : benign.front();
    GlobalModel out;
    out.round = round;
    out.weights = ModelWeights(proto.classes, proto.dim);

    for (std::size_t i = 0; i < benign.size(); ++i) {
        if (selection[i] == 0) continue;
        detail::require(benign[i].same_shape(proto), "aggregate: benign model " + std::to_string(i) + " shape mismatch");
        const double w = static_cast<double>(sizes[i]) / static_cast<double>(total);
        for (std::size_t p = 0; p < out.weights.flat.size(); ++p) out.weights.flat[p] += w * benign[i].flat[p];
    }
    for (std::size_t j = 0; j < malicious.size(); ++j) {
        detail::require(malicious[j].same_shape(proto), "aggregate: malicious model " + std::to_string(j) + " shape mismatch");
        const double w = static_cast<double>(claimed[j]) / static_cast<double>(total);
        for (std::size_t p = 0; p < out.weights.flat.size(); ++p) out.weights.flat[p] += w * malicious[j].flat[p];
    }
    return out;
}

} // namespace flpl
