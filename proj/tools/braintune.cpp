// braintune CLI: generate / pretrain / finetune / eval / ablate / reconstruct.
//
// Exit codes: 0 success, 2 usage or config error, 3 data-format error,
// 4 numerical failure (non-finite loss).

#include "braintune/checkpoint.hpp"
#include "braintune/classifier.hpp"
#include "braintune/connectome.hpp"
#include "braintune/errors.hpp"
#include "braintune/kernels.hpp"
#include "braintune/synthdata.hpp"
#include "braintune/trainer.hpp"

#include "png_writer.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace braintune;

#ifndef BRAINTUNE_GIT_DESCRIBE
#define BRAINTUNE_GIT_DESCRIBE "unknown"
#endif

namespace {

std::string iso_utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// --config is resolved before CLI11 runs so file values can serve as
// defaults; explicit flags then override them (flags > file > defaults)
json load_config_file(int argc, char** argv) {
    std::string path;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc)
            path = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0)
            path = arg.substr(9);
    }
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    try {
        json j;
        in >> j;
        if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
}

template <typename T>
void from_config(const json& cfg, const char* key, T& value) {
    if (cfg.contains(key)) {
        try {
            value = cfg.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(std::string("config key '") + key + "' has the wrong type");
        }
    }
}

struct ManifestWriter {
    std::string command;
    json config = json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::string started_at = iso_utc_now();

    json to_json() const {
        return {
            {"command", command},       {"config", config},
            {"inputs", inputs},         {"outputs", outputs},
            {"started_at", started_at}, {"finished_at", iso_utc_now()},
            {"git_describe", BRAINTUNE_GIT_DESCRIBE},
        };
    }

    void write(const fs::path& dir) const {
        std::ofstream out(dir / "manifest.json");
        if (!out) throw FormatError("cannot write " + (dir / "manifest.json").string());
        out << to_json().dump(2) << '\n';
    }

    // dataset directories already carry a manifest.json (the subject list);
    // the run record is merged into it under "run" so the directory keeps
    // exactly one manifest
    void merge_into(const fs::path& dir) const {
        const fs::path path = dir / "manifest.json";
        std::ifstream in(path);
        if (!in) throw FormatError("cannot open " + path.string());
        json existing;
        in >> existing;
        in.close();
        existing["run"] = to_json();
        std::ofstream out(path);
        if (!out) throw FormatError("cannot write " + path.string());
        out << existing.dump(2) << '\n';
    }
};

// --config/--kernels are consumed by the argv prescan; registering them on
// every subcommand keeps CLI11 from rejecting them in either position
void add_common_options(CLI::App* cmd) {
    static std::string sink_config, sink_kernels;
    cmd->add_option("--config", sink_config, "JSON config file (flags override its values)");
    cmd->add_option("--kernels", sink_kernels, "Kernel backend: auto, scalar, avx2");
}

// ---- shared option bundles ------------------------------------------------

struct ModelFlags {
    std::size_t adapter_hidden = 1024;
    std::size_t embed = 64;
    std::size_t depth = 2;
    std::size_t heads = 4;
    std::size_t ffn_hidden = 0; // 0 -> 4 * embed
    std::size_t latent = 32;
    bool no_ffn = false;
    bool no_norm = false;
    bool adapter_linear = false;

    void attach(CLI::App* cmd, const json& cfg) {
        from_config(cfg, "adapter-hidden", adapter_hidden);
        from_config(cfg, "embed", embed);
        from_config(cfg, "depth", depth);
        from_config(cfg, "heads", heads);
        from_config(cfg, "ffn-hidden", ffn_hidden);
        from_config(cfg, "latent", latent);
        from_config(cfg, "no-ffn", no_ffn);
        from_config(cfg, "no-norm", no_norm);
        from_config(cfg, "adapter-linear", adapter_linear);
        cmd->add_option("--adapter-hidden", adapter_hidden, "Adapter hidden width");
        cmd->add_option("--embed", embed, "Token embedding width B");
        cmd->add_option("--depth", depth, "Encoder depth D");
        cmd->add_option("--heads", heads, "Attention heads H");
        cmd->add_option("--ffn-hidden", ffn_hidden, "FFN hidden width (0 = 4*embed)");
        cmd->add_option("--latent", latent, "Latent readout dimension E");
        cmd->add_flag("--no-ffn", no_ffn, "Drop the FFN sub-block");
        cmd->add_flag("--no-norm", no_norm, "Drop residual connections and layer norm");
        cmd->add_flag("--adapter-linear", adapter_linear,
                      "Identity activation in the adapter (strict two-projection form)");
    }

    ModelConfig to_model_config(std::size_t regions) const {
        ModelConfig mc;
        mc.regions = regions;
        mc.adapter_hidden = adapter_hidden;
        mc.latent_dim = latent;
        mc.adapter_activation =
            adapter_linear ? AdapterActivation::identity : AdapterActivation::relu;
        mc.encoder.depth = depth;
        mc.encoder.heads = heads;
        mc.encoder.embed = embed;
        mc.encoder.ffn_hidden = ffn_hidden == 0 ? 4 * embed : ffn_hidden;
        mc.encoder.use_ffn = !no_ffn;
        mc.encoder.use_norm = !no_norm;
        return mc;
    }

    json to_json() const {
        return {{"adapter-hidden", adapter_hidden},
                {"embed", embed},
                {"depth", depth},
                {"heads", heads},
                {"ffn-hidden", ffn_hidden},
                {"latent", latent},
                {"no-ffn", no_ffn},
                {"no-norm", no_norm},
                {"adapter-linear", adapter_linear}};
    }
};

struct TrainFlags {
    double lr = 3e-4;
    double weight_decay = 5e-5;
    std::size_t epochs = 500;
    std::size_t batch_size = 16;
    double lambda_c = 0.2;
    double lambda_r = 5.0;
    double tau = 0.07;
    double mask_fraction = 0.1;
    std::uint64_t seed = 42;

    void attach(CLI::App* cmd, const json& cfg) {
        from_config(cfg, "lr", lr);
        from_config(cfg, "weight-decay", weight_decay);
        from_config(cfg, "epochs", epochs);
        from_config(cfg, "batch-size", batch_size);
        from_config(cfg, "lambda-c", lambda_c);
        from_config(cfg, "lambda-r", lambda_r);
        from_config(cfg, "tau", tau);
        from_config(cfg, "mask-fraction", mask_fraction);
        from_config(cfg, "seed", seed);
        cmd->add_option("--lr", lr, "Adam learning rate");
        cmd->add_option("--weight-decay", weight_decay, "Decoupled weight decay");
        cmd->add_option("--epochs", epochs, "Training epochs");
        cmd->add_option("--batch-size", batch_size, "Batch size");
        cmd->add_option("--lambda-c", lambda_c, "Contrastive loss weight");
        cmd->add_option("--lambda-r", lambda_r, "Reconstruction loss weight");
        cmd->add_option("--tau", tau, "InfoNCE temperature");
        cmd->add_option("--mask-fraction", mask_fraction,
                        "Off-diagonal fraction masked per view");
        cmd->add_option("--seed", seed, "Training seed");
    }

    TrainConfig to_train_config(TrainPhase phase) const {
        TrainConfig tc;
        tc.phase = phase;
        tc.lr = lr;
        tc.weight_decay = weight_decay;
        tc.epochs = epochs;
        tc.batch_size = batch_size;
        tc.weights.lambda_c = lambda_c;
        tc.weights.lambda_r = lambda_r;
        tc.weights.tau = tau;
        tc.mask_fraction = mask_fraction;
        tc.seed = seed;
        return tc;
    }

    json to_json() const {
        return {{"lr", lr},
                {"weight-decay", weight_decay},
                {"epochs", epochs},
                {"batch-size", batch_size},
                {"lambda-c", lambda_c},
                {"lambda-r", lambda_r},
                {"tau", tau},
                {"mask-fraction", mask_fraction},
                {"seed", seed}};
    }
};

struct EvalFlags {
    std::size_t repeats = 3;
    double test_fraction = 0.3;
    std::string positive_label = "class1";
    double svm_c = 1.0;
    std::size_t svm_epochs = 200;
    std::uint64_t seed = 42;

    void attach(CLI::App* cmd, const json& cfg) {
        from_config(cfg, "repeats", repeats);
        from_config(cfg, "test-fraction", test_fraction);
        from_config(cfg, "positive-label", positive_label);
        from_config(cfg, "svm-c", svm_c);
        from_config(cfg, "svm-epochs", svm_epochs);
        from_config(cfg, "eval-seed", seed);
        cmd->add_option("--repeats", repeats, "Runs to average");
        cmd->add_option("--test-fraction", test_fraction, "Held-out fraction per class");
        cmd->add_option("--positive-label", positive_label, "Disease (positive) class label");
        cmd->add_option("--svm-c", svm_c, "SVM regularization C");
        cmd->add_option("--svm-epochs", svm_epochs, "SVM training epochs");
        cmd->add_option("--eval-seed", seed, "Evaluation seed (split + SVM)");
    }

    json to_json() const {
        return {{"repeats", repeats},       {"test-fraction", test_fraction},
                {"positive-label", positive_label}, {"svm-c", svm_c},
                {"svm-epochs", svm_epochs}, {"eval-seed", seed}};
    }
};

// ---- helpers over library calls -------------------------------------------

std::vector<ConnectivityMatrix> load_connectivity(const fs::path& dataset) {
    auto cohort = load_cohort(dataset);
    return cohort_connectivity(cohort);
}

void write_train_log(std::ofstream& log, const EpochStats& s) {
    json line{{"epoch", s.epoch},
              {"l_c", s.contrastive},
              {"l_r", s.reconstruction},
              {"combined", s.combined}};
    log << line.dump() << '\n';
}

EvalReport run_single_eval(std::span<const ConnectivityMatrix> fcs, const ModelBundle& bundle,
                           const EvalFlags& flags, std::uint64_t run_seed) {
    std::vector<std::string> labels;
    labels.reserve(fcs.size());
    for (const auto& fc : fcs) labels.push_back(fc.label);
    SplitIndices split = stratified_split(labels, flags.test_fraction, run_seed);

    auto subset = [&fcs](const std::vector<std::size_t>& idx) {
        std::vector<ConnectivityMatrix> out;
        out.reserve(idx.size());
        for (std::size_t i : idx) out.push_back(fcs[i]);
        return out;
    };
    auto train_fcs = subset(split.train);
    auto test_fcs = subset(split.test);
    auto train_latents = extract_latents(train_fcs, bundle);
    auto test_latents = extract_latents(test_fcs, bundle);
    auto train_labels = binary_labels(train_latents, flags.positive_label);
    auto test_labels = binary_labels(test_latents, flags.positive_label);

    SvmConfig svm;
    svm.c = flags.svm_c;
    svm.epochs = flags.svm_epochs;
    svm.seed = run_seed;
    SvmModel model = svm_train(train_latents, train_labels, svm);
    return evaluate(model, test_latents, test_labels);
}

AveragedReport run_repeated_eval(std::span<const ConnectivityMatrix> fcs,
                                 const ModelBundle& bundle, const EvalFlags& flags) {
    std::vector<EvalReport> runs;
    for (std::size_t r = 0; r < flags.repeats; ++r)
        runs.push_back(run_single_eval(fcs, bundle, flags, flags.seed + r));
    return average_reports(runs);
}

json report_to_json(const EvalReport& r) {
    return {{"tp", r.tp},   {"fp", r.fp},   {"tn", r.tn},   {"fn", r.fn},
            {"acc", r.acc}, {"sen", r.sen}, {"spe", r.spe}, {"f1", r.f1}};
}

void print_report_table(const AveragedReport& avg) {
    std::printf("%-10s %8s %8s %8s %10s\n", "run", "ACC", "SEN", "SPE", "F1-score");
    for (std::size_t i = 0; i < avg.runs.size(); ++i) {
        const EvalReport& r = avg.runs[i];
        std::printf("%-10zu %8.4f %8.4f %8.4f %10.4f\n", i + 1, r.acc, r.sen, r.spe, r.f1);
    }
    std::printf("%-10s %8.4f %8.4f %8.4f %10.4f\n", "average", avg.acc, avg.sen, avg.spe, avg.f1);
}

void write_matrix_csv(const fs::path& path, const std::vector<double>& values, std::size_t n) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    for (std::size_t i = 0; i < n; ++i) {
        std::string line;
        for (std::size_t j = 0; j < n; ++j) {
            if (j) line += ',';
            line += format_g17(values[i * n + j]);
        }
        out << line << '\n';
    }
}

// ---- commands --------------------------------------------------------------

struct GenerateCmd {
    std::string out;
    SynthConfig synth;

    void attach(CLI::App& app, const json& cfg) {
        CLI::App* cmd = app.add_subcommand("generate", "Write a synthetic labeled cohort");
        add_common_options(cmd);
        cmd->add_option("--out", out, "Output dataset directory")->required();
        from_config(cfg, "regions", synth.regions);
        from_config(cfg, "timepoints", synth.timepoints);
        from_config(cfg, "per-class", synth.n_per_class);
        from_config(cfg, "communities", synth.n_communities);
        from_config(cfg, "shift", synth.inter_class_shift);
        from_config(cfg, "noise", synth.noise_std);
        from_config(cfg, "seed", synth.seed);
        cmd->add_option("--regions", synth.regions, "Regions V");
        cmd->add_option("--timepoints", synth.timepoints, "Timepoints T");
        cmd->add_option("--per-class", synth.n_per_class, "Subjects per class");
        cmd->add_option("--communities", synth.n_communities, "Latent communities");
        cmd->add_option("--shift", synth.inter_class_shift,
                        "Class-1 coupling weakening in [0,1]");
        cmd->add_option("--noise", synth.noise_std, "Per-sample noise stddev");
        cmd->add_option("--seed", synth.seed, "Generation seed");
        cmd->callback([this]() { run(); });
    }

    void run() const {
        ManifestWriter manifest;
        manifest.command = "generate";
        manifest.config = {{"regions", synth.regions},   {"timepoints", synth.timepoints},
                           {"per-class", synth.n_per_class}, {"communities", synth.n_communities},
                           {"shift", synth.inter_class_shift}, {"noise", synth.noise_std},
                           {"seed", synth.seed}};
        auto cohort = generate_cohort(synth);
        fs::create_directories(out);
        save_cohort(out, cohort);
        manifest.outputs = {"manifest.json", "signals/"};
        manifest.merge_into(out);
        std::printf("generate: wrote %zu subjects (V=%zu, T=%zu) to %s\n", cohort.size(),
                    synth.regions, synth.timepoints, out.c_str());
    }
};

struct PretrainCmd {
    std::string data, out;
    ModelFlags model;
    TrainFlags train;

    void attach(CLI::App& app, const json& cfg) {
        CLI::App* cmd = app.add_subcommand("pretrain",
                                           "Self-supervised training of the full model");
        add_common_options(cmd);
        cmd->add_option("--data", data, "Dataset directory")->required();
        cmd->add_option("--out", out, "Output directory")->required();
        model.attach(cmd, cfg);
        train.attach(cmd, cfg);
        cmd->callback([this]() { run(); });
    }

    void run() const {
        ManifestWriter manifest;
        manifest.command = "pretrain";
        manifest.config = model.to_json();
        manifest.config.update(train.to_json());
        manifest.inputs = {data};

        auto fcs = load_connectivity(data);
        ModelBundle bundle = init_bundle(model.to_model_config(fcs.front().regions), train.seed);
        fs::create_directories(out);
        std::ofstream log(fs::path(out) / "train_log.jsonl");
        ModelBundle trained =
            pretrain(fcs, bundle, train.to_train_config(TrainPhase::pretrain),
                     [&log](const EpochStats& s) { write_train_log(log, s); });
        const fs::path ckpt = fs::path(out) / "checkpoint.bt";
        save_checkpoint(trained, ckpt);
        manifest.outputs = {"checkpoint.bt", "train_log.jsonl"};
        manifest.write(out);
        std::printf("pretrain: %zu subjects, %zu epochs -> %s\n", fcs.size(), train.epochs,
                    ckpt.c_str());
    }
};

struct FinetuneCmd {
    std::string data, init, out;
    TrainFlags train;

    void attach(CLI::App& app, const json& cfg) {
        CLI::App* cmd =
            app.add_subcommand("finetune", "Frozen-encoder adapter/head fine-tuning");
        add_common_options(cmd);
        cmd->add_option("--data", data, "Dataset directory")->required();
        cmd->add_option("--init", init, "Checkpoint to start from")->required();
        cmd->add_option("--out", out, "Output directory")->required();
        train.attach(cmd, cfg);
        cmd->callback([this]() { run(); });
    }

    void run() const {
        ManifestWriter manifest;
        manifest.command = "finetune";
        manifest.config = train.to_json();
        manifest.inputs = {data, init};

        auto fcs = load_connectivity(data);
        ModelBundle bundle = load_checkpoint(init);
        bundle.set_encoder_frozen(true);
        fs::create_directories(out);
        std::ofstream log(fs::path(out) / "train_log.jsonl");
        ModelBundle trained =
            finetune(fcs, bundle, train.to_train_config(TrainPhase::finetune),
                     [&log](const EpochStats& s) { write_train_log(log, s); });
        const fs::path ckpt = fs::path(out) / "checkpoint.bt";
        save_checkpoint(trained, ckpt);
        manifest.outputs = {"checkpoint.bt", "train_log.jsonl"};
        manifest.write(out);
        std::printf("finetune: %zu subjects, %zu epochs -> %s\n", fcs.size(), train.epochs,
                    ckpt.c_str());
    }
};

struct EvalCmd {
    std::string data, checkpoint, out;
    EvalFlags eval;

    void attach(CLI::App& app, const json& cfg) {
        CLI::App* cmd = app.add_subcommand("eval", "SVM diagnosis metrics on latent features");
        add_common_options(cmd);
        cmd->add_option("--data", data, "Dataset directory")->required();
        cmd->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
        cmd->add_option("--out", out, "Output directory")->required();
        eval.attach(cmd, cfg);
        cmd->callback([this]() { run(); });
    }

    void run() const {
        ManifestWriter manifest;
        manifest.command = "eval";
        manifest.config = eval.to_json();
        manifest.inputs = {data, checkpoint};

        auto fcs = load_connectivity(data);
        ModelBundle bundle = load_checkpoint(checkpoint);
        AveragedReport avg = run_repeated_eval(fcs, bundle, eval);

        fs::create_directories(out);
        json report{{"positive_label", eval.positive_label},
                    {"repeats", eval.repeats},
                    {"averaged",
                     {{"acc", avg.acc}, {"sen", avg.sen}, {"spe", avg.spe}, {"f1", avg.f1}}},
                    {"runs", json::array()}};
        for (const auto& r : avg.runs) report["runs"].push_back(report_to_json(r));
        std::ofstream rout(fs::path(out) / "report.json");
        rout << report.dump(2) << '\n';
        manifest.outputs = {"report.json"};
        manifest.write(out);
        print_report_table(avg);
    }
};

struct AblateCmd {
    std::string data, checkpoint, out;
    TrainFlags train;
    EvalFlags eval;

    void attach(CLI::App& app, const json& cfg) {
        CLI::App* cmd = app.add_subcommand(
            "ablate", "Fine-tune + evaluate under the three loss configurations");
        add_common_options(cmd);
        cmd->add_option("--data", data, "Dataset directory")->required();
        cmd->add_option("--checkpoint", checkpoint, "Pretrained checkpoint")->required();
        cmd->add_option("--out", out, "Output directory")->required();
        train.attach(cmd, cfg);
        eval.attach(cmd, cfg);
        cmd->callback([this]() { run(); });
    }

    void run() const {
        ManifestWriter manifest;
        manifest.command = "ablate";
        manifest.config = train.to_json();
        manifest.config.update(eval.to_json());
        manifest.inputs = {data, checkpoint};

        auto fcs = load_connectivity(data);
        ModelBundle base = load_checkpoint(checkpoint);
        base.set_encoder_frozen(true);

        struct Row {
            const char* name;
            bool use_c, use_r;
            double acc = 0.0;
        };
        Row rows[3] = {{"lambda_r only", false, true},
                       {"lambda_c only", true, false},
                       {"both", true, true}};
        fs::create_directories(out);
        for (Row& row : rows) {
            TrainConfig tc = train.to_train_config(TrainPhase::finetune);
            tc.weights.lambda_c = row.use_c ? train.lambda_c : 0.0;
            tc.weights.lambda_r = row.use_r ? train.lambda_r : 0.0;
            ModelBundle tuned = finetune(fcs, base, tc);
            AveragedReport avg = run_repeated_eval(fcs, tuned, eval);
            row.acc = avg.acc;
        }

        json table = json::array();
        std::printf("%-10s %-10s %8s\n", "lambda_c", "lambda_r", "ACC");
        for (const Row& row : rows) {
            std::printf("%-10s %-10s %8.4f\n", row.use_c ? "yes" : "-",
                        row.use_r ? "yes" : "-", row.acc);
            table.push_back({{"config", row.name},
                             {"lambda_c", row.use_c ? train.lambda_c : 0.0},
                             {"lambda_r", row.use_r ? train.lambda_r : 0.0},
                             {"acc", row.acc}});
        }
        std::ofstream tout(fs::path(out) / "ablation.json");
        tout << table.dump(2) << '\n';
        manifest.outputs = {"ablation.json"};
        manifest.write(out);
    }
};

struct ReconstructCmd {
    std::string data, checkpoint, out, subject;
    std::size_t cell_px = 16;

    void attach(CLI::App& app, const json& cfg) {
        CLI::App* cmd = app.add_subcommand(
            "reconstruct", "Emit input vs reconstructed connectivity for one subject");
        add_common_options(cmd);
        cmd->add_option("--data", data, "Dataset directory")->required();
        cmd->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
        cmd->add_option("--subject", subject, "Subject id")->required();
        cmd->add_option("--out", out, "Output directory")->required();
        from_config(cfg, "cell-px", cell_px);
        cmd->add_option("--cell-px", cell_px, "Heatmap pixels per matrix cell");
        cmd->callback([this]() { run(); });
    }

    void run() const {
        ManifestWriter manifest;
        manifest.command = "reconstruct";
        manifest.config = {{"subject", subject}, {"cell-px", cell_px}};
        manifest.inputs = {data, checkpoint};

        auto fcs = load_connectivity(data);
        const ConnectivityMatrix* fc = nullptr;
        for (const auto& m : fcs)
            if (m.subject_id == subject) fc = &m;
        if (fc == nullptr)
            throw ConfigError("subject '" + subject + "' not found in " + data);
        ModelBundle bundle = load_checkpoint(checkpoint);

        Tensor tokens = encode_tokens(fc->to_tensor(false), bundle);
        Tensor recon = recon_forward(tokens, bundle.heads);
        for (double v : recon.data())
            if (!std::isfinite(v))
                throw NumericError("reconstruction produced a non-finite value");
        const double mse = mse_loss(recon, fc->to_tensor(false)).value();

        fs::create_directories(out);
        std::vector<double> recon_values(recon.data().begin(), recon.data().end());
        write_matrix_csv(fs::path(out) / "input_fc.csv", fc->values, fc->regions);
        write_matrix_csv(fs::path(out) / "reconstructed_fc.csv", recon_values, fc->regions);
        tools::write_matrix_heatmap(fs::path(out) / "input_fc.png", fc->values, fc->regions,
                                    cell_px);
        tools::write_matrix_heatmap(fs::path(out) / "reconstructed_fc.png", recon_values,
                                    fc->regions, cell_px);
        manifest.outputs = {"input_fc.csv", "reconstructed_fc.csv", "input_fc.png",
                            "reconstructed_fc.png"};
        manifest.write(out);
        std::printf("reconstruct: subject %s mse %.6g\n", subject.c_str(), mse);
    }
};

} // namespace

int main(int argc, char** argv) {
    try {
        const json cfg = load_config_file(argc, argv);

        // kernel backend must be pinned before any command callback runs
        std::string kernel_choice = "auto";
        from_config(cfg, "kernels", kernel_choice);
        for (int i = 1; i < argc; ++i) {
            const std::string arg = argv[i];
            if (arg == "--kernels" && i + 1 < argc)
                kernel_choice = argv[i + 1];
            else if (arg.rfind("--kernels=", 0) == 0)
                kernel_choice = arg.substr(10);
        }
        if (!kernels::select(kernel_choice))
            throw ConfigError("kernel backend '" + kernel_choice + "' is unavailable");

        CLI::App app{"Adapter fine-tuning pipeline for functional brain networks"};
        app.require_subcommand(1);
        std::string config_path;
        app.add_option("--config", config_path, "JSON config file (flags override its values)");
        app.add_option("--kernels", kernel_choice, "Kernel backend: auto, scalar, avx2");

        GenerateCmd generate;
        PretrainCmd pretrain_cmd;
        FinetuneCmd finetune_cmd;
        EvalCmd eval_cmd;
        AblateCmd ablate_cmd;
        ReconstructCmd reconstruct_cmd;
        generate.attach(app, cfg);
        pretrain_cmd.attach(app, cfg);
        finetune_cmd.attach(app, cfg);
        eval_cmd.attach(app, cfg);
        ablate_cmd.attach(app, cfg);
        reconstruct_cmd.attach(app, cfg);

        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            app.exit(e);
            return 2;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const DegenerateInputError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const DimensionError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
