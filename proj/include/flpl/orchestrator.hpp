#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "flpl/aggregate.hpp"
#include "flpl/attack.hpp"
#include "flpl/baselines.hpp"
#include "flpl/dataset.hpp"
#include "flpl/defense.hpp"
#include "flpl/duals.hpp"
#include "flpl/error.hpp"
#include "flpl/rng.hpp"
#include "flpl/svm.hpp"

namespace flpl {

enum class AttackKind { kNone, kVgaeMp, kMp, kRmp };

inline const char* attack_kind_label(AttackKind k) {
    switch (k) {
        case AttackKind::kNone: return "none";
        case AttackKind::kVgaeMp: return "vgae_mp";
        case AttackKind::kMp: return "mp-surrogate";
        case AttackKind::kRmp: return "rmp";
    }
    return "none";
}

// Per-attacker diagnostics captured each round.
struct AttackRecord {
    int attacker_id = 0;
    std::vector<double> loss_curve;
    double malicious_distance = 0.0;
    double stealth_threshold = 0.0;
    double selection_budget = 0.0;
    double selected_distance_sum = 0.0;
    DualState duals;
};

struct RoundLedger {
    int round = 0;
    std::vector<ModelWeights> benign_models;
    std::vector<ModelWeights> malicious_models;
    std::vector<int> selection;          // attacker 0's benign selection (all ones when unattacked)
    double stealth_multiplier = 0.0;     // attacker 0's duals after the round
    double selection_multiplier = 0.0;
    std::vector<double> distances;       // all uploads vs previous global, benign first
    std::vector<double> krum_scores;     // empty in observe mode
    std::set<int> flagged;               // upload ids removed by the filter
    double global_accuracy = 0.0;
    std::vector<double> per_client_accuracy;
    std::vector<double> malicious_accuracy;
    std::vector<double> per_client_loss;
    double global_loss = 0.0;
    std::vector<AttackRecord> attack_records;
};

struct OrchestratorConfig {
    FlConfig fl;
    AttackKind attack = AttackKind::kNone;
    int n_eavesdropped = 0; // 0 = every benign upload
    VgaeAttackConfig vgae;
    BaselineConfig baseline;
    DefenseMode defense = DefenseMode::kObserve;
    int defense_f = -1; // -1 = number of attackers
    std::uint64_t seed = 1;
    int jobs = 1;
};

// Round-synchronous federation: benign clients train from the broadcast
// model, attackers eavesdrop and upload, the server scores, filters,
// aggregates and broadcasts. All randomness is drawn from streams keyed by
// (seed, role, id, round) so the trajectory is independent of thread count.
class Orchestrator {
public:
    Orchestrator(OrchestratorConfig cfg, std::vector<ClientDataset> clients, std::vector<Sample> holdout)
        : cfg_(std::move(cfg)), clients_(std::move(clients)), holdout_(std::move(holdout)) {
        detail::require(!clients_.empty(), "orchestrator: no clients");
        detail::require(!holdout_.empty(), "orchestrator: empty holdout");
        const int dim = static_cast<int>(clients_[0].train.at(0).features.size());
        int classes = 0;
        for (const ClientDataset& c : clients_)
            for (const Sample& s : c.train) classes = std::max(classes, s.label + 1);
        for (const Sample& s : holdout_) classes = std::max(classes, s.label + 1);
        global_.weights = ModelWeights(classes, dim);
        global_.round = 0;
        duals_.assign(static_cast<std::size_t>(cfg_.fl.attackers),
                      DualState{cfg_.vgae.initial_stealth_multiplier, cfg_.vgae.initial_selection_multiplier,
                                cfg_.vgae.dual_step, 1.0, 1.0});
    }

    const GlobalModel& global() const { return global_; }
    const std::vector<RoundLedger>& ledger() const { return ledger_; }
    const std::vector<ClientDataset>& clients() const { return clients_; }
    const std::vector<Sample>& holdout() const { return holdout_; }

    // Test hook: returns the set of upload ids to drop, overriding the
    // configured defense filter.
    std::function<std::set<int>(const DetectionReport&, int benign_count, int total)> custom_filter;

    const RoundLedger& run_round() {
        const int round = global_.round + 1;
        const int n_benign = static_cast<int>(clients_.size());
        const int n_attackers = cfg_.attack == AttackKind::kNone ? 0 : cfg_.fl.attackers;

        RoundLedger row;
        row.round = round;
        row.benign_models = train_benign(round);

        // Eavesdropping: each attacker overhears the first n_eav uploads.
        int n_eav = cfg_.n_eavesdropped <= 0 ? n_benign : std::min(cfg_.n_eavesdropped, n_benign);
        std::vector<ModelWeights> eavesdropped(row.benign_models.begin(), row.benign_models.begin() + n_eav);
        std::vector<int> eav_sizes, eav_ids;
        for (int i = 0; i < n_eav; ++i) {
            eav_sizes.push_back(static_cast<int>(clients_[static_cast<std::size_t>(i)].train.size()));
            eav_ids.push_back(i);
        }

        row.selection.assign(static_cast<std::size_t>(n_benign), 1);
        for (int j = 0; j < n_attackers; ++j) {
            RngStream rng = RngStream::derive(cfg_.seed, {stream_tag::kAttacker, static_cast<std::uint64_t>(j),
                                                          static_cast<std::uint64_t>(round)});
            AttackRecord record;
            record.attacker_id = j;
            switch (cfg_.attack) {
                case AttackKind::kVgaeMp: {
                    VgaeAttackResult res = vgae_mp_round(eavesdropped, eav_sizes, eav_ids, n_benign, j, global_,
                                                         cfg_.vgae, duals_[static_cast<std::size_t>(j)], rng);
                    row.malicious_models.push_back(std::move(res.malicious));
                    duals_[static_cast<std::size_t>(j)] = res.duals;
                    record.loss_curve = std::move(res.loss_curve);
                    record.malicious_distance = res.malicious_distance;
                    record.stealth_threshold = res.duals.stealth_threshold;
                    record.selection_budget = res.duals.selection_budget;
                    record.selected_distance_sum = res.selected_distance_sum;
                    record.duals = res.duals;
                    if (j == 0) row.selection = res.selection;
                    break;
                }
                case AttackKind::kMp:
                    row.malicious_models.push_back(mp_attack(eavesdropped, eav_sizes, global_, cfg_.baseline));
                    record.duals = duals_[static_cast<std::size_t>(j)];
                    break;
                case AttackKind::kRmp:
                    row.malicious_models.push_back(rmp_attack(global_, cfg_.baseline, rng));
                    record.duals = duals_[static_cast<std::size_t>(j)];
                    break;
                case AttackKind::kNone:
                    break;
            }
            if (cfg_.attack != AttackKind::kNone) {
                record.malicious_distance =
                    euclidean_distance(row.malicious_models.back().flat, global_.weights.flat);
                row.attack_records.push_back(std::move(record));
            }
        }
        row.stealth_multiplier = duals_.empty() ? 0.0 : duals_[0].stealth_multiplier;
        row.selection_multiplier = duals_.empty() ? 0.0 : duals_[0].selection_multiplier;

        // Server-side detection and filtering over all uploads.
        std::vector<ModelWeights> uploads = row.benign_models;
        uploads.insert(uploads.end(), row.malicious_models.begin(), row.malicious_models.end());
        DetectionReport report = distance_report(uploads, global_);
        report.filter_mode = cfg_.defense;
        const int total_uploads = static_cast<int>(uploads.size());
        for (int i = 0; i < total_uploads; ++i) row.distances.push_back(report.per_model_distance.at(i));

        if (custom_filter) {
            row.flagged = custom_filter(report, n_benign, total_uploads);
        } else if (cfg_.defense != DefenseMode::kObserve) {
            const int f = cfg_.defense_f < 0 ? n_attackers : cfg_.defense_f;
            const int keep = cfg_.defense == DefenseMode::kKrum ? 1 : std::max(1, total_uploads - f);
            auto [kept, scores] = krum_select(uploads, f, keep);
            row.krum_scores = scores;
            std::set<int> kept_set(kept.begin(), kept.end());
            for (int i = 0; i < total_uploads; ++i)
                if (!kept_set.count(i)) row.flagged.insert(i);
        }
        report.flagged = row.flagged;

        // Aggregate what survived the filter.
        std::vector<int> benign_sizes, server_selection;
        for (int i = 0; i < n_benign; ++i) {
            benign_sizes.push_back(static_cast<int>(clients_[static_cast<std::size_t>(i)].train.size()));
            server_selection.push_back(row.flagged.count(i) ? 0 : 1);
        }
        long benign_total = 0;
        for (int s : benign_sizes) benign_total += s;
        const int claimed_default = static_cast<int>(benign_total / n_benign);
        std::vector<ModelWeights> kept_malicious;
        std::vector<int> claimed_sizes;
        for (std::size_t jm = 0; jm < row.malicious_models.size(); ++jm) {
            if (row.flagged.count(n_benign + static_cast<int>(jm))) continue;
            kept_malicious.push_back(row.malicious_models[jm]);
            claimed_sizes.push_back(cfg_.fl.claimed_attacker_size > 0 ? cfg_.fl.claimed_attacker_size
                                                                      : claimed_default);
        }
        global_ = aggregate(row.benign_models, benign_sizes, kept_malicious, claimed_sizes, server_selection, round);

        // Bookkeeping: accuracies on the shared holdout, benign global loss.
        row.global_accuracy = evaluate(global_.weights, holdout_);
        for (int i = 0; i < n_benign; ++i) {
            row.per_client_accuracy.push_back(evaluate(row.benign_models[static_cast<std::size_t>(i)], holdout_));
            row.per_client_loss.push_back(local_loss(row.benign_models[static_cast<std::size_t>(i)],
                                                     clients_[static_cast<std::size_t>(i)].train, cfg_.fl.reg_coeff));
            row.global_loss += static_cast<double>(benign_sizes[static_cast<std::size_t>(i)]) /
                               static_cast<double>(benign_total) * row.per_client_loss.back();
        }
        for (const ModelWeights& m : row.malicious_models) row.malicious_accuracy.push_back(evaluate(m, holdout_));

        ledger_.push_back(std::move(row));
        return ledger_.back();
    }

    // FNV-1a over the bit patterns of the trajectory; used to compare runs.
    std::uint64_t ledger_hash() const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix_double = [&h](double v) {
            std::uint64_t bits;
            static_assert(sizeof(bits) == sizeof(v));
            __builtin_memcpy(&bits, &v, sizeof(bits));
            for (int b = 0; b < 8; ++b) {
                h ^= (bits >> (8 * b)) & 0xFF;
                h *= 1099511628211ull;
            }
        };
        for (const RoundLedger& r : ledger_) {
            mix_double(static_cast<double>(r.round));
            for (const ModelWeights& m : r.benign_models)
                for (double v : m.flat) mix_double(v);
            for (const ModelWeights& m : r.malicious_models)
                for (double v : m.flat) mix_double(v);
            for (int s : r.selection) mix_double(static_cast<double>(s));
            for (double v : r.distances) mix_double(v);
            mix_double(r.global_accuracy);
            for (double v : r.per_client_accuracy) mix_double(v);
            mix_double(r.global_loss);
        }
        return h;
    }

private:
    std::vector<ModelWeights> train_benign(int round) {
        const int n = static_cast<int>(clients_.size());
        std::vector<ModelWeights> models(static_cast<std::size_t>(n));
        auto train_one = [&](int i) {
            RngStream rng = RngStream::derive(cfg_.seed, {stream_tag::kClient, static_cast<std::uint64_t>(i),
                                                          static_cast<std::uint64_t>(round)});
            models[static_cast<std::size_t>(i)] =
                local_train(global_.weights, clients_[static_cast<std::size_t>(i)], cfg_.fl, rng);
        };
        if (cfg_.jobs <= 1 || n == 1) {
            for (int i = 0; i < n; ++i) train_one(i);
        } else {
            std::vector<std::thread> pool;
            std::atomic<int> next{0};
            const int workers = std::min(cfg_.jobs, n);
            for (int w = 0; w < workers; ++w)
                pool.emplace_back([&] {
                    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) train_one(i);
                });
            for (std::thread& t : pool) t.join();
        }
        return models;
    }

    OrchestratorConfig cfg_;
    std::vector<ClientDataset> clients_;
    std::vector<Sample> holdout_;
    GlobalModel global_;
    std::vector<DualState> duals_;
    std::vector<RoundLedger> ledger_;
};

} // namespace flpl
