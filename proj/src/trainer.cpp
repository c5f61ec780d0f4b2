#include "bcsinet/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace bcsinet {

void TrainConfig::validate() const {
    if (epochs <= 0) throw std::invalid_argument("train config: epochs must be positive");
    if (warmup_epochs <= 0 || warmup_epochs >= epochs) {
        throw std::invalid_argument("train config: warmup must lie in (0, epochs)");
    }
    if (!(lr_start > 0) || !(lr_end > 0) || lr_end > lr_start) {
        throw std::invalid_argument("train config: need lr_start >= lr_end > 0");
    }
    if (batch_size <= 0) throw std::invalid_argument("train config: batch_size must be positive");
    if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1) || !(adam_eps > 0)) {
        throw std::invalid_argument("train config: bad Adam constants");
    }
    if (max_reboots < 0 || reboot_window < 0 || !(reboot_improvement >= 0)) {
        throw std::invalid_argument("train config: bad restart settings");
    }
}

double lr_at(int index, const TrainConfig& cfg) {
    if (index < 0 || index >= cfg.epochs) {
        throw std::out_of_range("lr_at: epoch index " + std::to_string(index) +
                                " outside [0, " + std::to_string(cfg.epochs) + ")");
    }
    if (index < cfg.warmup_epochs) {
        return cfg.lr_start * static_cast<double>(index + 1) / cfg.warmup_epochs;
    }
    const int span = std::max(1, cfg.epochs - 1 - cfg.warmup_epochs);
    const double t = static_cast<double>(index - cfg.warmup_epochs) / span;
    return cfg.lr_end + 0.5 * (cfg.lr_start - cfg.lr_end) * (1.0 + std::cos(M_PI * t));
}

void Adam::step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads,
                double lr) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("adam: parameter/gradient count mismatch");
    }
    if (m_.empty()) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            m_[i].assign(params[i]->data.size(), 0.0f);
            v_[i].assign(params[i]->data.size(), 0.0f);
        }
    }
    if (m_.size() != params.size()) throw std::invalid_argument("adam: state size mismatch");
    ++t_;
    const float b1 = static_cast<float>(beta1_);
    const float b2 = static_cast<float>(beta2_);
    const float eps = static_cast<float>(eps_);
    // Bias corrections folded into scalars so the per-element loop stays in
    // float and vectorizes.
    const float s1 = static_cast<float>(lr / (1.0 - std::pow(beta1_, static_cast<double>(t_))));
    const float inv_sqrt_bc2 = static_cast<float>(
        1.0 / std::sqrt(1.0 - std::pow(beta2_, static_cast<double>(t_))));
    for (size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i]->data;
        const auto& g = grads[i]->data;
        if (g.size() != p.size() || m_[i].size() != p.size()) {
            throw std::invalid_argument("adam: tensor size mismatch");
        }
        float* m = m_[i].data();
        float* v = v_[i].data();
        for (size_t k = 0; k < p.size(); ++k) {
            const float gk = g[k];
            m[k] = b1 * m[k] + (1.0f - b1) * gk;
            v[k] = b2 * v[k] + (1.0f - b2) * gk * gk;
            p[k] -= s1 * m[k] / (std::sqrt(v[k]) * inv_sqrt_bc2 + eps);
        }
    }
}

void Adam::restore(std::vector<std::vector<float>> m, std::vector<std::vector<float>> v,
                   uint64_t steps) {
    m_ = std::move(m);
    v_ = std::move(v);
    t_ = steps;
}

bool RebootPolicy::observe(int scheduler_index, double val_mse) {
    if (best_ < 0 || val_mse < best_ * (1.0 - threshold_)) {
        best_ = std::min(val_mse, best_ < 0 ? val_mse : best_);
        stale_ = 0;
        return false;
    }
    best_ = std::min(best_, val_mse);
    ++stale_;
    if (stale_ >= window_ && scheduler_index >= warmup_ && reboots_ < max_reboots_) {
        ++reboots_;
        stale_ = 0;
        return true;
    }
    return false;
}

bool RebootPolicy::force() {
    if (reboots_ >= max_reboots_) return false;
    ++reboots_;
    stale_ = 0;
    return true;
}

void RebootPolicy::restore(int reboots, double best_val_mse) {
    reboots_ = reboots;
    best_ = best_val_mse;
    stale_ = 0;
}

NmseResult nmse(const Tensor& pred, const Tensor& target) {
    if (pred.shape != target.shape || pred.rank() < 1 || pred.dim(0) == 0) {
        throw std::invalid_argument("nmse: shape mismatch or empty input");
    }
    const int n = target.dim(0);
    const size_t per = target.data.size() / static_cast<size_t>(n);
    NmseResult r;
    double sum = 0.0;
    int used = 0;
    for (int i = 0; i < n; ++i) {
        const float* h = target.data.data() + static_cast<size_t>(i) * per;
        const float* hh = pred.data.data() + static_cast<size_t>(i) * per;
        double num = 0.0, den = 0.0;
        for (size_t k = 0; k < per; ++k) {
            const double d = static_cast<double>(h[k]) - hh[k];
            num += d * d;
            den += static_cast<double>(h[k]) * h[k];
        }
        if (den == 0.0) {
            ++r.skipped;
            continue;
        }
        sum += num / den;
        ++used;
    }
    if (used == 0) throw std::invalid_argument("nmse: every sample has zero target energy");
    r.linear = sum / used;
    r.db = r.linear <= 1e-12 ? -120.0 : std::max(-120.0, 10.0 * std::log10(r.linear));
    return r;
}

namespace {

// Mean squared error and its gradient (2 * (y - x) / numel) in one pass.
double mse_and_grad(const Tensor& out, const Tensor& x, Tensor& grad) {
    grad.resize(out.shape);
    double sum = 0.0;
    const double scale = 2.0 / static_cast<double>(out.data.size());
    for (size_t i = 0; i < out.data.size(); ++i) {
        const double d = static_cast<double>(out.data[i]) - x.data[i];
        sum += d * d;
        grad.data[i] = static_cast<float>(scale * d);
    }
    return sum / static_cast<double>(out.data.size());
}

void gather(const Tensor& x, const std::vector<int>& idx, size_t begin, size_t end,
            Tensor& out) {
    std::vector<int> shape = x.shape;
    shape[0] = static_cast<int>(end - begin);
    out.resize(std::move(shape));
    const size_t per = x.data.size() / static_cast<size_t>(x.dim(0));
    for (size_t i = begin; i < end; ++i) {
        std::copy_n(x.data.data() + static_cast<size_t>(idx[i]) * per, per,
                    out.data.data() + (i - begin) * per);
    }
}

std::vector<Tensor*> all_params(Network& net) {
    auto p = net.encoder.params();
    for (auto* t : net.decoder.params()) p.push_back(t);
    return p;
}

std::vector<Tensor*> all_grads(Network& net) {
    auto g = net.encoder.grads();
    for (auto* t : net.decoder.grads()) g.push_back(t);
    return g;
}

}  // namespace

double train_step(Network& net, const Tensor& batch, double lr, Adam& adam) {
    // Persistent scratch so repeated steps recycle the allocation.
    static thread_local Tensor grad;
    net.encoder.zero_grads();
    net.decoder.zero_grads();
    const Tensor& code = net.encoder.forward(batch, Mode::Train);
    const Tensor& out = net.decoder.forward(code, Mode::Train);
    const double mse = mse_and_grad(out, batch, grad);
    net.decoder.backward(grad);
    net.encoder.backward(net.decoder.input_grad());
    adam.step(all_params(net), all_grads(net), lr);
    return mse;
}

Tensor predict(Network& net, const Tensor& x, int batch_size) {
    const int n = x.dim(0);
    Tensor out(x.shape);
    const size_t per = x.data.size() / static_cast<size_t>(n);
    std::vector<int> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    Tensor chunk;
    for (int at = 0; at < n; at += batch_size) {
        const size_t hi = static_cast<size_t>(std::min(n, at + batch_size));
        gather(x, idx, static_cast<size_t>(at), hi, chunk);
        const Tensor& rec = net.decoder.forward(net.encoder.forward(chunk, Mode::Eval), Mode::Eval);
        std::copy(rec.data.begin(), rec.data.end(),
                  out.data.begin() + static_cast<size_t>(at) * per);
    }
    return out;
}

FitResult fit(Network& net, const Dataset& train, const Dataset& val, const TrainConfig& cfg,
              const FitOptions& opts) {
    cfg.validate();
    if (train.count() == 0 || val.count() == 0) {
        throw std::invalid_argument("fit: empty training or validation split");
    }

    Adam adam(cfg.beta1, cfg.beta2, cfg.adam_eps);
    RebootPolicy policy(cfg);
    int start_epoch = 0;
    int sched_i = 0;
    if (opts.resume) {
        const Checkpoint& c = *opts.resume;
        start_epoch = static_cast<int>(c.epoch);
        sched_i = static_cast<int>(c.scheduler_index);
        policy.restore(static_cast<int>(c.reboots), c.best_val_mse);
        if (!c.adam_m.empty()) adam.restore(c.adam_m, c.adam_v, c.adam_step);
    }

    std::ofstream metrics;
    if (!opts.metrics_path.empty()) {
        metrics.open(opts.metrics_path, start_epoch > 0 ? std::ios::app : std::ios::trunc);
        if (!metrics) throw std::runtime_error("fit: cannot open " + opts.metrics_path);
    }

    const Tensor val_physical = val.denormalize(val.samples);
    const int n_train = train.count();
    std::vector<int> idx(static_cast<size_t>(n_train));
    std::iota(idx.begin(), idx.end(), 0);

    FitResult result;
    Network best;
    if (opts.resume) {
        result.best_val_mse = opts.resume->best_val_mse;
        best = net;  // resumed runs track the best from current weights onward
    }

    for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_at(std::min(sched_i, cfg.epochs - 1), cfg);

        // start from the identity order so the permutation depends only on
        // the epoch, making resumed runs identical to uninterrupted ones
        std::iota(idx.begin(), idx.end(), 0);
        std::mt19937_64 rng(cfg.shuffle_seed + static_cast<uint64_t>(epoch));
        std::shuffle(idx.begin(), idx.end(), rng);

        double train_mse = 0.0;
        Tensor batch;
        for (int at = 0; at < n_train; at += cfg.batch_size) {
            const size_t hi = static_cast<size_t>(std::min(n_train, at + cfg.batch_size));
            gather(train.samples, idx, static_cast<size_t>(at), hi, batch);
            const double m = train_step(net, batch, lr, adam);
            train_mse += m * static_cast<double>(hi - static_cast<size_t>(at));
        }
        train_mse /= n_train;

        Tensor val_pred = predict(net, val.samples, cfg.batch_size);
        Tensor diff_grad;  // unused; reuse mse_and_grad for the reduction
        const double val_mse = mse_and_grad(val_pred, val.samples, diff_grad);
        const NmseResult vn = nmse(val.denormalize(val_pred), val_physical);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr;
        rec.train_mse = train_mse;
        rec.val_mse = val_mse;
        rec.val_nmse_db = vn.db;

        if (std::isfinite(val_mse) && (result.best_epoch < 0 || val_mse < result.best_val_mse)) {
            result.best_val_mse = val_mse;
            result.best_epoch = epoch;
            best = net;
        }

        bool reboot;
        if (!std::isfinite(train_mse) || !std::isfinite(val_mse)) {
            if (!policy.force()) {
                throw std::runtime_error("fit: loss is non-finite and restarts are exhausted");
            }
            if (result.best_epoch >= 0) net = best;  // roll back to the last good weights
            reboot = true;
        } else {
            reboot = policy.observe(sched_i, val_mse);
        }
        rec.reboots = policy.reboots();
        sched_i = reboot ? cfg.warmup_epochs : std::min(sched_i + 1, cfg.epochs - 1);

        result.history.push_back(rec);
        if (metrics.is_open()) {
            nlohmann::json j{{"epoch", rec.epoch},       {"lr", rec.lr},
                             {"train_mse", rec.train_mse}, {"val_mse", rec.val_mse},
                             {"val_nmse_db", rec.val_nmse_db}, {"reboots", rec.reboots}};
            metrics << j.dump() << "\n";
            metrics.flush();
        }
        if (!opts.checkpoint_path.empty()) {
            Checkpoint state;
            state.spec = net.spec;
            state.build_seed = 0;
            state.norm_min = train.norm_min;
            state.norm_max = train.norm_max;
            state.epoch = static_cast<uint32_t>(epoch + 1);
            state.scheduler_index = static_cast<uint32_t>(sched_i);
            state.reboots = static_cast<uint32_t>(policy.reboots());
            state.adam_step = adam.steps();
            state.best_val_mse = static_cast<float>(result.best_val_mse);
            state.adam_m = adam.m();
            state.adam_v = adam.v();
            save_checkpoint(opts.checkpoint_path, net, state);
        }
        if (opts.on_epoch) opts.on_epoch(rec);
    }

    if (result.best_epoch >= 0) net = best;
    return result;
}

}  // namespace bcsinet
