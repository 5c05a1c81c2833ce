#pragma once

// Functional connectivity construction from multi-region time series, plus
// the on-disk cohort format (manifest.json + one CSV per subject).

#include "braintune/tensor.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace braintune {

/// Conventional atlas region count; synthetic cohorts default to 16.
inline constexpr std::size_t kAtlasRegions = 90;

/// One subject's recording: `regions` x `timepoints` signal, row-major by
/// region, plus a class label.
struct BoldRecording {
    std::string subject_id;
    std::string label;
    std::size_t regions = 0;
    std::size_t timepoints = 0;
    std::vector<double> signal;

    std::span<const double> region(std::size_t r) const {
        return {signal.data() + r * timepoints, timepoints};
    }

    /// Checks the structural invariants (regions >= 2, timepoints >= 3,
    /// buffer size) and, when check_variance is set, rejects regions whose
    /// temporal variance is zero. A population variance at or below
    /// 1e-15 * max(1, mean square) counts as zero; exact-zero comparison is
    /// not robust once the mean subtraction rounds.
    void validate(bool check_variance = true) const;
};

/// Symmetric Pearson correlation matrix with unit diagonal and entries in
/// [-1, 1].
struct ConnectivityMatrix {
    std::string subject_id;
    std::string label;
    std::size_t regions = 0;
    std::vector<double> values; // regions x regions, row-major

    double at(std::size_t i, std::size_t j) const { return values[i * regions + j]; }
    Tensor to_tensor(bool requires_grad = false) const;
    void validate() const;
};

/// Pearson correlation of every region pair using population (1/T) moments.
/// The upper triangle is computed and mirrored; the diagonal is exactly 1.
/// Throws DegenerateInputError naming the first zero-variance region.
ConnectivityMatrix pearson_fc(const BoldRecording& rec);

/// Reads a cohort directory (manifest.json listing subject_id, label and a
/// per-subject CSV of T rows x V columns). All subjects must share V.
std::vector<BoldRecording> load_cohort(const std::filesystem::path& dir);

/// Writes a cohort in the same directory layout.
void save_cohort(const std::filesystem::path& dir, std::span<const BoldRecording> cohort);

/// pearson_fc over a whole cohort.
std::vector<ConnectivityMatrix> cohort_connectivity(std::span<const BoldRecording> cohort);

} // namespace braintune
