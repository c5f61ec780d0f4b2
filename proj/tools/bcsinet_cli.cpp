#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bcsinet/binkernel.hpp"
#include "bcsinet/channel_data.hpp"
#include "bcsinet/complexity.hpp"
#include "bcsinet/models.hpp"
#include "bcsinet/trainer.hpp"

namespace {

using namespace bcsinet;

int env_threads() {
    const char* v = std::getenv("BCSI_THREADS");
    if (!v) return 1;
    const int n = std::atoi(v);
    if (n < 1) throw std::invalid_argument("BCSI_THREADS must be a positive integer");
    return n;
}

void log_resolved(const CLI::App* sub) {
    std::cerr << "# resolved config (" << sub->get_name() << ")\n";
    for (const auto* opt : sub->get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string name = opt->get_lnames().front();
        if (name == "help" || name == "config") continue;
        std::string value = opt->count() ? opt->results().front() : opt->get_default_str();
        std::cerr << name << "=" << value << "\n";
    }
}

struct SpecFlags {
    std::string family = "bcsinet";
    std::string head = "A";
    int refinenets = 2;
    double eta = 0.25;
    int na = 32;
    int nt = 32;

    void attach(CLI::App* sub) {
        sub->add_option("--family", family, "csinet or bcsinet")->capture_default_str();
        sub->add_option("--head", head, "encoder head: A, B or C")->capture_default_str();
        sub->add_option("--refinenets", refinenets, "decoder RefineNet count (2 or 3)")
            ->capture_default_str();
        sub->add_option("--eta", eta, "compression ratio M / (2*na*nt)")->capture_default_str();
        sub->add_option("--na", na, "retained delay rows")->capture_default_str();
        sub->add_option("--nt", nt, "transmit antennas")->capture_default_str();
    }
    ModelSpec spec() const {
        ModelSpec s;
        s.family = family_from_string(family);
        s.head = head_from_string(head);
        s.refinenets = refinenets;
        s.eta = eta;
        s.na = na;
        s.nt = nt;
        s.validate();
        return s;
    }
};

double eval_nmse_db(const Dataset& ds, const std::function<Tensor(const Tensor&)>& reconstruct,
                    bool normalized, int batch) {
    const int n = ds.count();
    Tensor pred(ds.samples.shape);
    const size_t per = ds.samples.data.size() / static_cast<size_t>(n);
    for (int at = 0; at < n; at += batch) {
        const int hi = std::min(n, at + batch);
        std::vector<int> shape = ds.samples.shape;
        shape[0] = hi - at;
        Tensor chunk(shape);
        std::copy_n(ds.samples.data.data() + static_cast<size_t>(at) * per,
                    chunk.data.size(), chunk.data.data());
        Tensor rec = reconstruct(chunk);
        std::copy(rec.data.begin(), rec.data.end(),
                  pred.data.begin() + static_cast<size_t>(at) * per);
    }
    if (normalized) return nmse(pred, ds.samples).db;
    return nmse(ds.denormalize(pred), ds.denormalize(ds.samples)).db;
}

int cmd_gen_data(uint64_t seed, double scale, const std::string& out, int na, int nt, int nc) {
    GenProfile profile;
    profile.na = na;
    profile.nt = nt;
    profile.nc = nc;
    const int n_train = static_cast<int>(std::lround(100000 * scale));
    const int n_val = static_cast<int>(std::lround(30000 * scale));
    const int n_test = static_cast<int>(std::lround(20000 * scale));
    if (n_train <= 0 || n_val <= 0 || n_test <= 0) {
        throw std::invalid_argument("gen-data: scale too small, a split would be empty");
    }
    std::filesystem::create_directories(out);
    SplitDatasets splits =
        generate_splits(n_train, n_val, n_test, seed, profile, env_threads());
    save(splits.train, out + "/train.bin");
    save(splits.val, out + "/val.bin");
    save(splits.test, out + "/test.bin");
    std::printf("wrote %d/%d/%d samples to %s/{train,val,test}.bin\n", n_train, n_val, n_test,
                out.c_str());
    return 0;
}

int cmd_train(const SpecFlags& sf, const std::string& data_dir, const std::string& out,
              TrainConfig cfg, uint64_t seed, const std::string& resume_path, bool normalized) {
    const ModelSpec spec = sf.spec();
    cfg.validate();
    Dataset train = load_dataset(data_dir + "/train.bin");
    Dataset val = load_dataset(data_dir + "/val.bin");
    std::filesystem::create_directories(out);

    Network net;
    FitOptions opts;
    opts.metrics_path = out + "/metrics.jsonl";
    opts.checkpoint_path = out + "/last.ckpt";
    Checkpoint resume_state;
    if (!resume_path.empty()) {
        resume_state = load_checkpoint(resume_path, net);
        if (resume_state.spec.name() != spec.name()) {
            throw std::invalid_argument("train: --resume checkpoint holds a different variant (" +
                                        resume_state.spec.name() + ")");
        }
        opts.resume = &resume_state;
    } else {
        net = build(spec, seed);
    }

    std::printf("training %s for %d epochs (batch %d)\n", spec.name().c_str(), cfg.epochs,
                cfg.batch_size);
    opts.on_epoch = [](const EpochRecord& r) {
        std::printf("epoch %d lr %.3e train_mse %.6f val_mse %.6f val_nmse %.2f dB\n", r.epoch,
                    r.lr, r.train_mse, r.val_mse, r.val_nmse_db);
    };
    const FitResult result = fit(net, train, val, cfg, opts);

    Checkpoint best;
    best.spec = spec;
    best.build_seed = seed;
    best.norm_min = train.norm_min;
    best.norm_max = train.norm_max;
    best.epoch = static_cast<uint32_t>(cfg.epochs);
    best.scheduler_index = static_cast<uint32_t>(cfg.epochs - 1);
    best.best_val_mse = static_cast<float>(result.best_val_mse);
    save_checkpoint(out + "/model.ckpt", net, best);

    const double db = eval_nmse_db(
        val, [&](const Tensor& x) { return decode(net, encode(net, x)); }, normalized,
        cfg.batch_size);
    std::printf("best epoch %d val_mse %.6f\n", result.best_epoch, result.best_val_mse);
    std::printf("NMSE: %.2f dB\n", db);
    return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& deployed, const std::string& data,
             bool normalized, int batch) {
    Dataset ds = load_dataset(data);
    double db;
    if (!deployed.empty()) {
        DeployedModel model = import_model(deployed);
        db = eval_nmse_db(
            ds, [&](const Tensor& x) { return model.decode(model.encode(x)); }, normalized,
            batch);
    } else {
        Network net;
        load_checkpoint(ckpt, net);
        db = eval_nmse_db(
            ds, [&](const Tensor& x) { return decode(net, encode(net, x)); }, normalized, batch);
    }
    std::printf("NMSE: %.2f dB\n", db);
    return 0;
}

int cmd_analyze(const std::string& mode, bool csv, const std::string& out) {
    const std::string text = csv ? complexity::table_csv(mode) : complexity::table(mode);
    if (out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        std::ofstream os(out, std::ios::trunc);
        if (!os) throw std::runtime_error("analyze: cannot open " + out);
        os << text;
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

int cmd_bench(const SpecFlags& sf, const std::string& ckpt, const std::string& deployed,
              int iters, int runs) {
    DeployedModel model;
    if (!deployed.empty()) {
        model = import_model(deployed);
    } else if (!ckpt.empty()) {
        Network net;
        const Checkpoint state = load_checkpoint(ckpt, net);
        model = deploy(net, state.norm_min, state.norm_max);
    } else {
        Network net = build(sf.spec(), 1);
        model = deploy(net, 0.0f, 1.0f);
    }
    const BenchReport rep = bench(model, iters, runs);
    std::printf("shape: %d x %d\n", model.fc.rows, model.fc.cols);
    std::printf("multiplications per inference: binary %lld, dense %lld\n", rep.binary_muls,
                rep.dense_muls);
    std::printf("median time: binary %.0f ns, dense %.0f ns\n", rep.binary_ns, rep.dense_ns);
    std::printf("speedup: %.2fx (run spread %.1f%%)\n", rep.speedup, 100.0 * rep.run_spread);
    return 0;
}

int cmd_export(const std::string& ckpt, const std::string& out) {
    Network net;
    const Checkpoint state = load_checkpoint(ckpt, net);
    export_model(net, state.norm_min, state.norm_max, out);
    std::printf("wrote %s (%lld FC bytes)\n", out.c_str(),
                deploy(net, state.norm_min, state.norm_max).fc_storage_bytes());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary-weight CSI feedback autoencoder toolkit"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "synthesize train/val/test channel datasets");
    uint64_t gen_seed = 7;
    double gen_scale = 0.01;
    std::string gen_out;
    int gen_na = 32, gen_nt = 32, gen_nc = 1024;
    gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
    gen->add_option("--scale", gen_scale, "fraction of the 100000/30000/20000 full split")
        ->capture_default_str();
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--na", gen_na, "retained delay rows")->capture_default_str();
    gen->add_option("--nt", gen_nt, "transmit antennas")->capture_default_str();
    gen->add_option("--nc", gen_nc, "subcarriers before truncation")->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "train a variant and write checkpoints + metrics");
    SpecFlags train_spec;
    train_spec.attach(train);
    std::string train_data = "data", train_out = "run", train_resume;
    TrainConfig cfg;
    cfg.epochs = 200;     // desk-scale defaults; full runs pass --epochs 2500 --batch 1000
    cfg.batch_size = 64;
    uint64_t train_seed = 1;
    bool train_normalized = false;
    train->add_option("--data", train_data, "dataset directory")->capture_default_str();
    train->add_option("--out", train_out, "run output directory")->capture_default_str();
    train->add_option("--epochs", cfg.epochs, "total epochs")->capture_default_str();
    train->add_option("--warmup", cfg.warmup_epochs, "linear warmup epochs")
        ->capture_default_str();
    train->add_option("--lr-start", cfg.lr_start, "peak learning rate")->capture_default_str();
    train->add_option("--lr-end", cfg.lr_end, "final learning rate")->capture_default_str();
    train->add_option("--batch", cfg.batch_size, "batch size")->capture_default_str();
    train->add_option("--max-reboots", cfg.max_reboots, "cosine-phase restart budget")
        ->capture_default_str();
    train->add_option("--reboot-window", cfg.reboot_window,
                      "stale epochs before a restart (0 = epochs/10)")
        ->capture_default_str();
    train->add_option("--seed", train_seed, "init + shuffle seed")->capture_default_str();
    train->add_option("--resume", train_resume, "checkpoint to continue from");
    train->add_flag("--normalized", train_normalized,
                    "report NMSE on the normalized scale instead of the physical one");

    // eval
    auto* ev = app.add_subcommand("eval", "reconstruction NMSE of a checkpoint or deployed model");
    std::string ev_ckpt, ev_deployed, ev_data = "data/test.bin";
    bool ev_normalized = false;
    int ev_batch = 64;
    ev->add_option("--ckpt", ev_ckpt, "training checkpoint");
    ev->add_option("--deployed", ev_deployed, "deployed model file");
    ev->add_option("--data", ev_data, "dataset file")->capture_default_str();
    ev->add_option("--batch", ev_batch, "inference batch size")->capture_default_str();
    ev->add_flag("--normalized", ev_normalized,
                 "report NMSE on the normalized scale instead of the physical one");

    // analyze
    auto* an = app.add_subcommand("analyze", "complexity and memory tables");
    std::string an_table = "tab4", an_out;
    bool an_csv = false;
    an->add_option("--table", an_table, "tab1, tab2, tab4 or fig4")->capture_default_str();
    an->add_flag("--csv", an_csv, "emit CSV instead of an aligned table");
    an->add_option("--out", an_out, "write to a file instead of stdout");

    // bench
    auto* be = app.add_subcommand("bench", "binary vs float FC kernel benchmark");
    SpecFlags bench_spec;
    bench_spec.attach(be);
    std::string be_ckpt, be_deployed;
    int be_iters = 2000, be_runs = 5;
    be->add_option("--ckpt", be_ckpt, "training checkpoint");
    be->add_option("--deployed", be_deployed, "deployed model file");
    be->add_option("--iters", be_iters, "iterations per run")->capture_default_str();
    be->add_option("--runs", be_runs, "independent runs for the spread estimate")
        ->capture_default_str();

    // export
    auto* ex = app.add_subcommand("export", "write the deployed (BN-fused, 1-bit FC) model");
    std::string ex_ckpt, ex_out;
    ex->add_option("--ckpt", ex_ckpt, "training checkpoint")->required();
    ex->add_option("--out", ex_out, "output model file")->required();

    for (auto* sub : app.get_subcommands({})) {
        sub->set_config("--config", "", "key=value file; flags override file values");
        sub->allow_config_extras(false);
    }

    try {
        app.parse(argc, argv);
        const CLI::App* sub = app.get_subcommands().front();
        log_resolved(sub);
        if (*gen) return cmd_gen_data(gen_seed, gen_scale, gen_out, gen_na, gen_nt, gen_nc);
        if (*train) {
            return cmd_train(train_spec, train_data, train_out, cfg, train_seed, train_resume,
                             train_normalized);
        }
        if (*ev) {
            if (ev_ckpt.empty() == ev_deployed.empty()) {
                throw CLI::ValidationError("eval", "pass exactly one of --ckpt / --deployed");
            }
            return cmd_eval(ev_ckpt, ev_deployed, ev_data, ev_normalized, ev_batch);
        }
        if (*an) return cmd_analyze(an_table, an_csv, an_out);
        if (*be) return cmd_bench(bench_spec, be_ckpt, be_deployed, be_iters, be_runs);
        if (*ex) return cmd_export(ex_ckpt, ex_out);
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::out_of_range& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
