#include "braintune/checkpoint.hpp"
#include "braintune/errors.hpp"
#include "braintune/sha256.hpp"
#include "braintune/synthdata.hpp"
#include "braintune/trainer.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace braintune;

namespace {

ModelConfig small_model(std::size_t regions) {
    ModelConfig cfg;
    cfg.regions = regions;
    cfg.adapter_hidden = 16;
    cfg.latent_dim = 8;
    cfg.encoder.depth = 1;
    cfg.encoder.heads = 2;
    cfg.encoder.embed = 8;
    cfg.encoder.ffn_hidden = 16;
    return cfg;
}

std::vector<ConnectivityMatrix> small_cohort(std::size_t n_per_class, std::uint64_t seed = 7) {
    SynthConfig cfg;
    cfg.regions = 8;
    cfg.timepoints = 60;
    cfg.n_per_class = n_per_class;
    cfg.n_communities = 2;
    cfg.inter_class_shift = 0.8;
    cfg.noise_std = 0.2;
    cfg.seed = seed;
    return cohort_connectivity(generate_cohort(cfg));
}

TrainConfig quick_train(TrainPhase phase, std::size_t epochs, std::uint64_t seed = 5) {
    TrainConfig cfg;
    cfg.phase = phase;
    cfg.epochs = epochs;
    cfg.batch_size = 8;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("masked_view zeroes a symmetric off-diagonal fraction") {
    auto fcs = small_cohort(1);
    const ConnectivityMatrix& fc = fcs.front();
    Rng rng(9);
    Tensor view = masked_view(fc, 0.25, rng);
    const std::size_t v = fc.regions;
    std::size_t zeroed_pairs = 0;
    for (std::size_t i = 0; i < v; ++i) {
        CHECK(view.at(i, i) == fc.at(i, i)); // diagonal untouched
        for (std::size_t j = i + 1; j < v; ++j) {
            CHECK(view.at(i, j) == view.at(j, i));
            if (view.at(i, j) == 0.0 && fc.at(i, j) != 0.0) ++zeroed_pairs;
        }
    }
    const std::size_t expect = static_cast<std::size_t>(std::llround(0.25 * v * (v - 1) / 2.0));
    CHECK(zeroed_pairs == expect);

    Rng rng_a(9), rng_b(9);
    Tensor va = masked_view(fc, 0.25, rng_a);
    Tensor vb = masked_view(fc, 0.25, rng_b);
    for (std::size_t i = 0; i < va.numel(); ++i) CHECK(va.data()[i] == vb.data()[i]);
}

TEST_CASE("phase preconditions") {
    auto fcs = small_cohort(2);
    ModelBundle bundle = init_bundle(small_model(8), 1);
    CHECK_THROWS_AS(finetune(fcs, bundle, quick_train(TrainPhase::finetune, 1)), ConfigError);
    bundle.set_encoder_frozen(true);
    CHECK_THROWS_AS(pretrain(fcs, bundle, quick_train(TrainPhase::pretrain, 1)), ConfigError);
    CHECK_THROWS_AS(finetune(fcs, bundle, quick_train(TrainPhase::pretrain, 1)), ConfigError);
    std::vector<ConnectivityMatrix> empty;
    bundle.set_encoder_frozen(false);
    CHECK_THROWS_AS(pretrain(empty, bundle, quick_train(TrainPhase::pretrain, 1)),
                    DegenerateInputError);
}

TEST_CASE("finetune leaves the encoder bytes untouched") {
    auto fcs = small_cohort(3);
    ModelBundle bundle = init_bundle(small_model(8), 2);
    bundle = pretrain(fcs, bundle, quick_train(TrainPhase::pretrain, 3));
    bundle.set_encoder_frozen(true);
    const std::string before = sha256_hex(bundle.encoder_bytes());
    ModelBundle tuned = finetune(fcs, bundle, quick_train(TrainPhase::finetune, 5));
    CHECK(sha256_hex(tuned.encoder_bytes()) == before);
    // the adapter did move
    bool adapter_changed = false;
    for (std::size_t i = 0; i < tuned.adapter.w1.numel(); ++i)
        adapter_changed |= tuned.adapter.w1.data()[i] != bundle.adapter.w1.data()[i];
    CHECK(adapter_changed);
}

TEST_CASE("identical seed/config/data give bitwise-identical results") {
    auto fcs = small_cohort(3);
    ModelBundle init = init_bundle(small_model(8), 3);
    init.set_encoder_frozen(true);
    ModelBundle a = finetune(fcs, init, quick_train(TrainPhase::finetune, 4, 11));
    ModelBundle b = finetune(fcs, init, quick_train(TrainPhase::finetune, 4, 11));
    auto ta = a.named_tensors();
    auto tb = b.named_tensors();
    REQUIRE(ta.size() == tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) {
        auto da = ta[i].tensor.data();
        auto db = tb[i].tensor.data();
        REQUIRE(da.size() == db.size());
        for (std::size_t k = 0; k < da.size(); ++k) CHECK(da[k] == db[k]);
    }
    // a different seed diverges
    ModelBundle c = finetune(fcs, init, quick_train(TrainPhase::finetune, 4, 12));
    bool differs = false;
    auto tc = c.named_tensors();
    for (std::size_t i = 0; i < ta.size() && !differs; ++i)
        for (std::size_t k = 0; k < ta[i].tensor.numel() && !differs; ++k)
            differs = ta[i].tensor.data()[k] != tc[i].tensor.data()[k];
    CHECK(differs);
}

TEST_CASE("training reports finite, decreasing-on-overfit losses") {
    auto fcs = small_cohort(2, 21); // 4 subjects

    std::vector<EpochStats> log;
    TrainConfig cfg = quick_train(TrainPhase::pretrain, 120, 31);
    ModelBundle bundle = init_bundle(small_model(8), 4);
    pretrain(fcs, bundle, cfg, [&log](const EpochStats& s) { log.push_back(s); });
    REQUIRE(log.size() == 120);
    for (const auto& s : log) {
        CHECK(std::isfinite(s.combined));
        CHECK(s.reconstruction >= 0.0);
    }
    CHECK(log.back().combined < 0.5 * log.front().combined);
    CHECK(log.back().epoch == 120);
}

TEST_CASE("500-epoch finetune on a 4-subject overfit set cuts the loss below 10%") {
    auto fcs = small_cohort(2, 23); // 4 subjects
    ModelBundle bundle = init_bundle(small_model(8), 9);
    bundle = pretrain(fcs, bundle, quick_train(TrainPhase::pretrain, 20, 41));
    bundle.set_encoder_frozen(true);

    std::vector<double> combined;
    finetune(fcs, bundle, quick_train(TrainPhase::finetune, 500, 42),
             [&combined](const EpochStats& s) { combined.push_back(s.combined); });
    REQUIRE(combined.size() == 500);
    CHECK(combined.back() < 0.1 * combined.front());
}

TEST_CASE("reconstruction from untrained weights stays finite") {
    auto fcs = small_cohort(1, 29);
    ModelBundle bundle = init_bundle(small_model(8), 12); // random init, no training
    Tensor tokens = encode_tokens(fcs.front().to_tensor(false), bundle);
    Tensor recon = recon_forward(tokens, bundle.heads);
    CHECK(recon.rows() == 8);
    CHECK(recon.cols() == 8);
    for (double v : recon.data()) CHECK(std::isfinite(v));
    CHECK(std::isfinite(mse_loss(recon, fcs.front().to_tensor(false)).value()));
}

TEST_CASE("epoch stats weight every subject equally across batches") {
    auto fcs = small_cohort(3); // 6 subjects, batch 4 -> batches of 4 and 2
    TrainConfig cfg = quick_train(TrainPhase::pretrain, 1, 17);
    cfg.batch_size = 4;
    ModelBundle bundle = init_bundle(small_model(8), 5);
    EpochStats seen;
    pretrain(fcs, bundle, cfg, [&seen](const EpochStats& s) { seen = s; });
    CHECK(std::isfinite(seen.contrastive));
    CHECK(std::isfinite(seen.reconstruction));
    CHECK(seen.combined ==
          doctest::Approx(0.2 * seen.contrastive + 5.0 * seen.reconstruction).epsilon(1e-9));
}

TEST_CASE("training rejects subjects whose V differs from the model") {
    auto fcs = small_cohort(2);
    ModelBundle bundle = init_bundle(small_model(10), 6);
    CHECK_THROWS_AS(pretrain(fcs, bundle, quick_train(TrainPhase::pretrain, 1)), DimensionError);
}
