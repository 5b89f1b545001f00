#pragma once

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include "flpl/duals.hpp"
#include "flpl/error.hpp"
#include "flpl/graph.hpp"
#include "flpl/knapsack.hpp"
#include "flpl/mat.hpp"
#include "flpl/rng.hpp"
#include "flpl/spectral.hpp"
#include "flpl/svm.hpp"
#include "flpl/vgae.hpp"

namespace flpl {

struct VgaeAttackConfig {
    int selected_params = 100; // number of model coordinates behind the graph nodes
    int spectral_rank = 64;    // basis size for the transplant, clipped to selected_params
    int hidden1 = 32;
    int hidden2 = 16;
    double vgae_learning_rate = 0.01;
    int vgae_epochs = 50;
    bool vgae_minimize = false; // ablation: train toward reconstruction instead of away

    double dual_step = 0.01;
    double initial_stealth_multiplier = 0.1;
    double initial_selection_multiplier = 0.1;
    // <= 0 means derive per round: threshold = median eavesdropped distance
    // to the global model, budget = sum of distances to the benign mean.
    double fixed_stealth_threshold = 0.0;
    double fixed_selection_budget = 0.0;
};

struct VgaeAttackResult {
    ModelWeights malicious;
    std::vector<int> selection; // over all I benign clients, 1 = used for VGAE training
    DualState duals;
    std::vector<double> loss_curve;
    double malicious_distance = 0.0;
    double selected_distance_sum = 0.0;
};

namespace detail {

inline double median(std::vector<double> v) {
    require(!v.empty(), "median: empty input");
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

inline ModelWeights weighted_mean(const std::vector<ModelWeights>& models, const std::vector<int>& sizes) {
    require(!models.empty() && models.size() == sizes.size(), "weighted_mean: bad inputs");
    long total = 0;
    for (int s : sizes) total += s;
    require(total > 0, "weighted_mean: total size must be positive");
    ModelWeights mean(models[0].classes, models[0].dim);
    for (std::size_t i = 0; i < models.size(); ++i) {
        const double w = static_cast<double>(sizes[i]) / static_cast<double>(total);
        for (std::size_t p = 0; p < mean.flat.size(); ++p) mean.flat[p] += w * models[i].flat[p];
    }
    return mean;
}

} // namespace detail

// One attacker round: pick high-variance coordinates, choose benign models
// under the distance budget, train the adversarial autoencoder on their
// correlation graph, transplant the features through the perturbed spectral
// basis, splice them into the global model, and finally reprice the duals.
inline VgaeAttackResult vgae_mp_round(const std::vector<ModelWeights>& eavesdropped,
                                      const std::vector<int>& eavesdropped_sizes,
                                      const std::vector<int>& eavesdropped_ids, int benign_count, int attacker_row,
                                      const GlobalModel& global_prev, const VgaeAttackConfig& cfg, DualState duals,
                                      RngStream& rng) {
    detail::require(!eavesdropped.empty(), "vgae_mp_round: nothing eavesdropped");
    detail::require(eavesdropped.size() == eavesdropped_sizes.size() && eavesdropped.size() == eavesdropped_ids.size(),
                    "vgae_mp_round: eavesdropped lists misaligned");

    const std::vector<int> param_index = select_parameters(eavesdropped, cfg.selected_params);

    const ModelWeights benign_mean = detail::weighted_mean(eavesdropped, eavesdropped_sizes);
    std::vector<double> mean_distances(eavesdropped.size());
    for (std::size_t i = 0; i < eavesdropped.size(); ++i)
        mean_distances[i] = euclidean_distance(eavesdropped[i].flat, benign_mean.flat);

    double budget = cfg.fixed_selection_budget;
    if (budget <= 0.0) {
        budget = 0.0;
        for (double d : mean_distances) budget += d;
        if (budget <= 0.0) budget = 1.0; // identical models: any selection fits
    }

    std::vector<int> picked = select_benign_knapsack(mean_distances, budget);
    if (std::count(picked.begin(), picked.end(), 1) == 0) {
        std::cerr << "warning: vgae_mp_round: selection came back empty, using every eavesdropped model\n";
        std::fill(picked.begin(), picked.end(), 1);
    }

    std::vector<ModelWeights> training_models;
    double selected_distance_sum = 0.0;
    for (std::size_t i = 0; i < eavesdropped.size(); ++i) {
        if (picked[i] == 0) continue;
        training_models.push_back(eavesdropped[i]);
        selected_distance_sum += mean_distances[i];
    }

    const ParameterGraph graph = build_graph(training_models, param_index);
    VgaeParams params = VgaeParams::init(static_cast<int>(training_models.size()), cfg.hidden1, cfg.hidden2,
                                         cfg.vgae_learning_rate, rng);
    VgaeTrainResult trained = train_vgae(graph, std::move(params), cfg.vgae_epochs, rng, !cfg.vgae_minimize);

    const int rank = std::min(cfg.spectral_rank, cfg.selected_params);
    const Mat reconstructed = spectral_transplant(graph, trained.adjacency_hat, rank);

    VgaeAttackResult out;
    out.malicious = assemble_malicious(reconstructed, attacker_row % reconstructed.rows(), global_prev, param_index);
    out.malicious_distance = euclidean_distance(out.malicious.flat, global_prev.weights.flat);
    out.selected_distance_sum = selected_distance_sum;
    out.loss_curve = std::move(trained.loss_curve);

    out.selection.assign(static_cast<std::size_t>(benign_count), 0);
    for (std::size_t i = 0; i < eavesdropped.size(); ++i)
        if (picked[i] != 0) out.selection[static_cast<std::size_t>(eavesdropped_ids[i])] = 1;

    double threshold = cfg.fixed_stealth_threshold;
    if (threshold <= 0.0) {
        std::vector<double> global_distances(eavesdropped.size());
        for (std::size_t i = 0; i < eavesdropped.size(); ++i)
            global_distances[i] = euclidean_distance(eavesdropped[i].flat, global_prev.weights.flat);
        threshold = detail::median(global_distances);
    }
    duals.step_size = cfg.dual_step;
    duals.stealth_threshold = threshold;
    duals.selection_budget = budget;
    out.duals = update_duals(out.malicious_distance, selected_distance_sum, duals);
    return out;
}

} // namespace flpl
