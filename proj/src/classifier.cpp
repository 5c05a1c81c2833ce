#include "braintune/classifier.hpp"

#include "braintune/errors.hpp"
#include "braintune/kernels.hpp"
#include "braintune/ops.hpp"
#include "braintune/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace braintune {

LatentFeature extract_latent(const ConnectivityMatrix& fc, const ModelBundle& bundle) {
    if (fc.regions != bundle.config.regions)
        throw DimensionError("extract_latent: subject '" + fc.subject_id + "' has " +
                             std::to_string(fc.regions) + " regions, model expects " +
                             std::to_string(bundle.config.regions));
    // inference path: no tape, no masking
    Tensor tokens = encode_tokens(fc.to_tensor(false), bundle);
    Tensor latent = cls_forward(tokens, bundle.heads);
    LatentFeature out;
    out.subject_id = fc.subject_id;
    out.label = fc.label;
    out.values.assign(latent.data().begin(), latent.data().end());
    return out;
}

std::vector<LatentFeature> extract_latents(std::span<const ConnectivityMatrix> fcs,
                                           const ModelBundle& bundle) {
    std::vector<LatentFeature> out;
    out.reserve(fcs.size());
    for (const auto& fc : fcs) out.push_back(extract_latent(fc, bundle));
    return out;
}

double SvmModel::decision(std::span<const double> x) const {
    return kernels::active().dot(weights.data(), x.data(), weights.size()) + bias;
}

SvmModel svm_train(std::span<const LatentFeature> features, std::span<const int> labels,
                   const SvmConfig& config) {
    if (features.empty()) throw DegenerateInputError("svm_train: empty training set");
    if (features.size() != labels.size())
        throw DimensionError("svm_train: features and labels differ in length");
    const std::size_t n = features.size();
    const std::size_t dim = features.front().values.size();
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (features[i].values.size() != dim)
            throw DimensionError("svm_train: inconsistent feature dimensions");
        (labels[i] > 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg)
        throw DegenerateInputError("svm_train: both classes must be present");
    if (!(config.c > 0.0)) throw ConfigError("svm_train: C must be positive");

    const double lambda = 1.0 / (config.c * static_cast<double>(n));
    const double radius = 1.0 / std::sqrt(lambda);
    Rng rng(derive_seed(config.seed, 0x57a7));
    SvmModel model;
    model.weights.assign(dim, 0.0);
    const auto& k = kernels::active();
    const std::size_t steps = config.epochs * n;
    for (std::size_t t = 1; t <= steps; ++t) {
        const std::size_t i = rng.index(n);
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const double margin =
            static_cast<double>(labels[i]) * model.decision(features[i].values);
        k.scale(model.weights.data(), 1.0 - eta * lambda, model.weights.data(), dim);
        if (margin < 1.0) {
            const double coeff = eta * static_cast<double>(labels[i]);
            k.axpy(coeff, features[i].values.data(), model.weights.data(), dim);
            model.bias += coeff;
        }
        // project back onto the ball of radius 1/sqrt(lambda)
        const double norm_sq = k.dot(model.weights.data(), model.weights.data(), dim);
        if (norm_sq > radius * radius) {
            k.scale(model.weights.data(), radius / std::sqrt(norm_sq), model.weights.data(), dim);
        }
    }
    return model;
}

EvalReport EvalReport::from_counts(std::size_t tp, std::size_t fp, std::size_t tn,
                                   std::size_t fn) {
    EvalReport r;
    r.tp = tp;
    r.fp = fp;
    r.tn = tn;
    r.fn = fn;
    auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
    r.acc = ratio(static_cast<double>(tp + tn), static_cast<double>(tp + tn + fp + fn));
    r.sen = ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
    r.spe = ratio(static_cast<double>(tn), static_cast<double>(tn + fp));
    r.f1 = ratio(2.0 * static_cast<double>(tp), static_cast<double>(2 * tp + fp + fn));
    return r;
}

EvalReport evaluate(const SvmModel& model, std::span<const LatentFeature> features,
                    std::span<const int> labels) {
    if (features.empty()) throw DegenerateInputError("evaluate: empty evaluation set");
    if (features.size() != labels.size())
        throw DimensionError("evaluate: features and labels differ in length");
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const int pred = model.predict(features[i].values);
        if (labels[i] > 0)
            (pred > 0 ? tp : fn) += 1;
        else
            (pred > 0 ? fp : tn) += 1;
    }
    return EvalReport::from_counts(tp, fp, tn, fn);
}

AveragedReport average_reports(std::span<const EvalReport> runs) {
    if (runs.empty()) throw DegenerateInputError("average_reports: no runs");
    AveragedReport avg;
    avg.runs.assign(runs.begin(), runs.end());
    for (const auto& r : runs) {
        avg.acc += r.acc;
        avg.sen += r.sen;
        avg.spe += r.spe;
        avg.f1 += r.f1;
    }
    const double n = static_cast<double>(runs.size());
    avg.acc /= n;
    avg.sen /= n;
    avg.spe /= n;
    avg.f1 /= n;
    return avg;
}

SplitIndices stratified_split(std::span<const std::string> labels, double test_fraction,
                              std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("stratified_split: test_fraction must lie in (0, 1)");
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
    SplitIndices split;
    std::uint64_t group_tag = 0;
    for (auto& [label, indices] : groups) {
        Rng rng(derive_seed(seed, 0x5011, ++group_tag));
        rng.shuffle(indices);
        std::size_t n_test = static_cast<std::size_t>(
            std::llround(test_fraction * static_cast<double>(indices.size())));
        if (n_test == 0 && indices.size() > 1) n_test = 1;
        if (n_test >= indices.size()) n_test = indices.size() - 1;
        for (std::size_t i = 0; i < indices.size(); ++i)
            (i < n_test ? split.test : split.train).push_back(indices[i]);
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

std::vector<int> binary_labels(std::span<const LatentFeature> features,
                               const std::string& positive_label) {
    std::vector<int> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(f.label == positive_label ? 1 : -1);
    return out;
}

} // namespace braintune
