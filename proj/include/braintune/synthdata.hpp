#pragma once

// Labeled synthetic BOLD cohorts with class-dependent community structure.
// Class 1 weakens the couplings of the first community, which is what the
// downstream pipeline has to detect.

#include "braintune/connectome.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace braintune {

struct SynthConfig {
    std::size_t regions = 16;
    std::size_t timepoints = 120;
    std::size_t n_per_class = 60;
    std::size_t n_communities = 4;
    double inter_class_shift = 0.8; // in [0, 1]; 0 makes the classes identical
    double noise_std = 0.1;         // must be positive
    std::uint64_t seed = 42;

    void validate() const;
};

inline constexpr const char* kClassLabels[2] = {"class0", "class1"};

/// Deterministic cohort: per community a shared sinusoid source (random
/// per-subject phase and frequency jitter), mixed into each region with a
/// random weight plus Gaussian noise. Class-1 subjects have community 0's
/// mixing weights scaled by (1 - inter_class_shift).
std::vector<BoldRecording> generate_cohort(const SynthConfig& config);

/// Mean off-diagonal correlation inside the perturbed (first) community.
double perturbed_block_mean(const ConnectivityMatrix& fc, std::size_t n_communities);

/// Midpoint threshold on the perturbed-block mean, fitted on a training
/// split. Subjects below the threshold are called positive (weakened
/// coupling). This is the simple baseline the learned pipeline is compared
/// against.
struct ThresholdRule {
    double threshold = 0.0;
    std::size_t n_communities = 0;

    bool predict_positive(const ConnectivityMatrix& fc) const {
        return perturbed_block_mean(fc, n_communities) < threshold;
    }
};

ThresholdRule fit_threshold_rule(std::span<const ConnectivityMatrix> train,
                                 const std::string& positive_label, std::size_t n_communities);

double threshold_rule_accuracy(const ThresholdRule& rule,
                               std::span<const ConnectivityMatrix> eval_set,
                               const std::string& positive_label);

} // namespace braintune
