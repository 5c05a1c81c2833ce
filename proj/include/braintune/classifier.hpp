#pragma once

// Latent readout, linear SVM diagnosis and the ACC/SEN/SPE/F1 report.

#include "braintune/synthdata.hpp"
#include "braintune/trainer.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace braintune {

struct LatentFeature {
    std::string subject_id;
    std::string label;
    std::vector<double> values; // unit-norm, latent_dim long
};

/// adapter -> frozen encoder -> mean pool -> projection -> L2 normalize.
/// Deterministic: no masking at inference time.
LatentFeature extract_latent(const ConnectivityMatrix& fc, const ModelBundle& bundle);

std::vector<LatentFeature> extract_latents(std::span<const ConnectivityMatrix> fcs,
                                           const ModelBundle& bundle);

struct SvmModel {
    std::vector<double> weights;
    double bias = 0.0;

    double decision(std::span<const double> x) const;
    int predict(std::span<const double> x) const { return decision(x) > 0.0 ? 1 : -1; }
};

struct SvmConfig {
    double c = 1.0;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;
};

/// Pegasos-style primal subgradient training of hinge loss + L2, with
/// lambda = 1/(C*n), step 1/(lambda*t), norm projection and an unregularized
/// bias. labels are +1/-1 aligned with features; both classes must appear.
SvmModel svm_train(std::span<const LatentFeature> features, std::span<const int> labels,
                   const SvmConfig& config);

struct EvalReport {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double acc = 0.0, sen = 0.0, spe = 0.0, f1 = 0.0;

    /// Computes the four metrics from counts. Ratios with a zero denominator
    /// are defined as 0 (covers f1 when tp is 0).
    static EvalReport from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);
};

/// Confusion metrics of the model on a labeled set; +1 is the positive
/// (disease) class.
EvalReport evaluate(const SvmModel& model, std::span<const LatentFeature> features,
                    std::span<const int> labels);

/// Per-run reports plus the arithmetic mean of each metric.
struct AveragedReport {
    std::vector<EvalReport> runs;
    double acc = 0.0, sen = 0.0, spe = 0.0, f1 = 0.0;
};

AveragedReport average_reports(std::span<const EvalReport> runs);

/// Deterministic stratified split: per label, shuffle with the seed and send
/// round(n * test_fraction) subjects to the test side.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

SplitIndices stratified_split(std::span<const std::string> labels, double test_fraction,
                              std::uint64_t seed);

/// +1 where label == positive_label, else -1.
std::vector<int> binary_labels(std::span<const LatentFeature> features,
                               const std::string& positive_label);

} // namespace braintune
