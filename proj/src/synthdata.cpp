#include "braintune/synthdata.hpp"

#include "braintune/errors.hpp"
#include "braintune/rng.hpp"

#include <cmath>
#include <cstdio>

namespace braintune {

void SynthConfig::validate() const {
    if (regions < 2) throw ConfigError("synth: regions must be >= 2");
    if (timepoints < 3) throw ConfigError("synth: timepoints must be >= 3");
    if (n_per_class == 0) throw ConfigError("synth: n_per_class must be >= 1");
    if (n_communities == 0 || regions % n_communities != 0)
        throw ConfigError("synth: regions must be divisible by n_communities");
    if (!(inter_class_shift >= 0.0 && inter_class_shift <= 1.0))
        throw ConfigError("synth: inter_class_shift must lie in [0, 1]");
    if (!(noise_std > 0.0)) throw ConfigError("synth: noise_std must be positive");
}

std::vector<BoldRecording> generate_cohort(const SynthConfig& config) {
    config.validate();
    const std::size_t v = config.regions;
    const std::size_t t = config.timepoints;
    const std::size_t community_size = v / config.n_communities;
    constexpr double two_pi = 2.0 * 3.14159265358979323846;

    std::vector<BoldRecording> cohort;
    cohort.reserve(2 * config.n_per_class);
    for (std::size_t cls = 0; cls < 2; ++cls) {
        for (std::size_t s = 0; s < config.n_per_class; ++s) {
            Rng rng(derive_seed(config.seed, cls, s));
            // one latent source per community
            std::vector<double> phase(config.n_communities);
            std::vector<double> freq(config.n_communities);
            for (std::size_t c = 0; c < config.n_communities; ++c) {
                phase[c] = rng.uniform(0.0, two_pi);
                freq[c] = static_cast<double>(c + 1) + rng.uniform(-0.25, 0.25);
            }
            std::vector<double> weight(v);
            for (std::size_t r = 0; r < v; ++r) {
                weight[r] = rng.uniform(0.8, 1.2);
                if (cls == 1 && r / community_size == 0)
                    weight[r] *= 1.0 - config.inter_class_shift;
            }
            BoldRecording rec;
            char id[32];
            std::snprintf(id, sizeof(id), "%s_%03zu", kClassLabels[cls], s);
            rec.subject_id = id;
            rec.label = kClassLabels[cls];
            rec.regions = v;
            rec.timepoints = t;
            rec.signal.resize(v * t);
            for (std::size_t r = 0; r < v; ++r) {
                const std::size_t c = r / community_size;
                for (std::size_t k = 0; k < t; ++k) {
                    const double source =
                        std::sin(two_pi * freq[c] * static_cast<double>(k) /
                                     static_cast<double>(t) +
                                 phase[c]);
                    rec.signal[r * t + k] = weight[r] * source + config.noise_std * rng.normal();
                }
            }
            cohort.push_back(std::move(rec));
        }
    }
    return cohort;
}

double perturbed_block_mean(const ConnectivityMatrix& fc, std::size_t n_communities) {
    if (n_communities == 0 || fc.regions % n_communities != 0)
        throw ConfigError("perturbed_block_mean: regions not divisible by n_communities");
    const std::size_t block = fc.regions / n_communities;
    if (block < 2)
        throw DegenerateInputError("perturbed_block_mean: community has fewer than 2 regions");
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < block; ++i) {
        for (std::size_t j = i + 1; j < block; ++j) {
            acc += fc.at(i, j);
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

ThresholdRule fit_threshold_rule(std::span<const ConnectivityMatrix> train,
                                 const std::string& positive_label, std::size_t n_communities) {
    double pos_sum = 0.0, neg_sum = 0.0;
    std::size_t pos_n = 0, neg_n = 0;
    for (const auto& fc : train) {
        const double m = perturbed_block_mean(fc, n_communities);
        if (fc.label == positive_label) {
            pos_sum += m;
            ++pos_n;
        } else {
            neg_sum += m;
            ++neg_n;
        }
    }
    if (pos_n == 0 || neg_n == 0)
        throw DegenerateInputError("fit_threshold_rule: both classes must be present");
    ThresholdRule rule;
    rule.n_communities = n_communities;
    rule.threshold = 0.5 * (pos_sum / pos_n + neg_sum / neg_n);
    return rule;
}

double threshold_rule_accuracy(const ThresholdRule& rule,
                               std::span<const ConnectivityMatrix> eval_set,
                               const std::string& positive_label) {
    if (eval_set.empty()) throw DegenerateInputError("threshold_rule_accuracy: empty set");
    std::size_t correct = 0;
    for (const auto& fc : eval_set) {
        const bool is_pos = fc.label == positive_label;
        if (rule.predict_positive(fc) == is_pos) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(eval_set.size());
}

} // namespace braintune
