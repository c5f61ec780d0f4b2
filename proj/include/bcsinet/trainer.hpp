#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bcsinet/binkernel.hpp"
#include "bcsinet/channel_data.hpp"
#include "bcsinet/models.hpp"

namespace bcsinet {

struct TrainConfig {
    int epochs = 2500;
    int warmup_epochs = 30;
    double lr_start = 1e-2;
    double lr_end = 5e-5;
    int batch_size = 1000;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-7;
    uint64_t shuffle_seed = 1;
    // Restart the cosine phase when validation MSE has not improved by at
    // least `reboot_improvement` (relative) for `reboot_window` epochs.
    int max_reboots = 2;
    double reboot_improvement = 0.01;
    int reboot_window = 0;  // 0 picks epochs / 10

    int effective_reboot_window() const {
        return reboot_window > 0 ? reboot_window : std::max(1, epochs / 10);
    }
    void validate() const;
};

// Warmup-cosine schedule: linear ramp to lr_start over the first
// warmup_epochs indices, then a cosine decay to lr_end at index epochs - 1.
double lr_at(int index, const TrainConfig& cfg);

class Adam {
public:
    Adam(double beta1, double beta2, double eps) : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads, double lr);

    uint64_t steps() const { return t_; }
    const std::vector<std::vector<float>>& m() const { return m_; }
    const std::vector<std::vector<float>>& v() const { return v_; }
    void restore(std::vector<std::vector<float>> m, std::vector<std::vector<float>> v,
                 uint64_t steps);

private:
    double beta1_, beta2_, eps_;
    uint64_t t_ = 0;
    std::vector<std::vector<float>> m_, v_;
};

// Validation-plateau restart: fires when the relative improvement over the
// best seen MSE stays below the threshold for a full window during the
// cosine phase, at most max_reboots times.
class RebootPolicy {
public:
    explicit RebootPolicy(const TrainConfig& cfg)
        : window_(cfg.effective_reboot_window()),
          threshold_(cfg.reboot_improvement),
          max_reboots_(cfg.max_reboots),
          warmup_(cfg.warmup_epochs) {}

    // Call once per epoch with the scheduler index in effect; returns true
    // when a restart should happen (scheduler index goes back to warmup).
    bool observe(int scheduler_index, double val_mse);

    // Unconditional restart request (e.g. non-finite loss); false when the
    // restart budget is spent.
    bool force();

    int reboots() const { return reboots_; }
    double best() const { return best_; }
    void restore(int reboots, double best_val_mse);

private:
    int window_;
    double threshold_;
    int max_reboots_;
    int warmup_;
    double best_ = -1.0;
    int stale_ = 0;
    int reboots_ = 0;
};

struct NmseResult {
    double linear = 0.0;
    double db = 0.0;
    int skipped = 0;  // samples with zero target energy, excluded from the mean
};

// Mean over samples of |h - h_hat|^2 / |h|^2; dB value floored at -120.
NmseResult nmse(const Tensor& pred, const Tensor& target);

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double train_mse = 0.0;
    double val_mse = 0.0;
    double val_nmse_db = 0.0;
    int reboots = 0;
};

struct FitResult {
    std::vector<EpochRecord> history;
    double best_val_mse = 0.0;
    int best_epoch = -1;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// One optimizer step on a batch of normalized samples; returns the batch MSE.
double train_step(Network& net, const Tensor& batch, double lr, Adam& adam);

// Eval-mode reconstruction of a dataset in batches.
Tensor predict(Network& net, const Tensor& x, int batch_size);

struct FitOptions {
    std::string metrics_path;     // JSONL, one record per epoch; empty = off
    std::string checkpoint_path;  // rewritten every epoch; empty = off
    const Checkpoint* resume = nullptr;
    EpochCallback on_epoch;
};

// Trains net on the normalized training split, tracks validation MSE and
// physical-scale NMSE, and leaves net holding the best-validation weights.
FitResult fit(Network& net, const Dataset& train, const Dataset& val, const TrainConfig& cfg,
              const FitOptions& opts = {});

}  // namespace bcsinet
