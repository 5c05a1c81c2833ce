#include "braintune/connectome.hpp"

#include "braintune/errors.hpp"
#include "braintune/kernels.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace braintune {

namespace {

using kernels::active;

constexpr double kVarianceFloor = 1e-15;

// population mean/variance of one region; returns false for zero variance
bool region_moments(std::span<const double> row, double& mean, double& var) {
    const std::size_t t = row.size();
    mean = active().sum(row.data(), t) / static_cast<double>(t);
    double acc = 0.0, msq = 0.0;
    for (double v : row) {
        const double d = v - mean;
        acc += d * d;
        msq += v * v;
    }
    var = acc / static_cast<double>(t);
    msq /= static_cast<double>(t);
    return var > kVarianceFloor * std::max(1.0, msq);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void BoldRecording::validate(bool check_variance) const {
    if (regions < 2)
        throw DegenerateInputError("recording '" + subject_id + "': needs at least 2 regions");
    if (timepoints < 3)
        throw DegenerateInputError("recording '" + subject_id + "': needs at least 3 timepoints");
    if (signal.size() != regions * timepoints)
        throw ContractError("recording '" + subject_id + "': signal buffer size mismatch");
    for (double v : signal)
        if (!std::isfinite(v))
            throw NumericError("recording '" + subject_id + "': non-finite sample");
    if (check_variance) {
        for (std::size_t r = 0; r < regions; ++r) {
            double mean, var;
            if (!region_moments(region(r), mean, var))
                throw DegenerateInputError("recording '" + subject_id + "': region " +
                                           std::to_string(r) + " has zero temporal variance");
        }
    }
}

Tensor ConnectivityMatrix::to_tensor(bool requires_grad) const {
    return Tensor::from_data({regions, regions}, values, requires_grad);
}

void ConnectivityMatrix::validate() const {
    if (values.size() != regions * regions)
        throw ContractError("connectivity matrix '" + subject_id + "': buffer size mismatch");
    for (std::size_t i = 0; i < regions; ++i) {
        if (at(i, i) != 1.0)
            throw ContractError("connectivity matrix '" + subject_id + "': diagonal not 1");
        for (std::size_t j = 0; j < regions; ++j) {
            const double v = at(i, j);
            if (!(v >= -1.0 && v <= 1.0))
                throw ContractError("connectivity matrix '" + subject_id + "': entry out of [-1,1]");
            if (std::abs(v - at(j, i)) > 1e-12)
                throw ContractError("connectivity matrix '" + subject_id + "': not symmetric");
        }
    }
}

ConnectivityMatrix pearson_fc(const BoldRecording& rec) {
    rec.validate(false);
    const std::size_t v = rec.regions, t = rec.timepoints;
    std::vector<double> centered(v * t);
    std::vector<double> inv_sd(v);
    for (std::size_t i = 0; i < v; ++i) {
        double mean, var;
        if (!region_moments(rec.region(i), mean, var))
            throw DegenerateInputError("pearson_fc: region " + std::to_string(i) +
                                       " of '" + rec.subject_id + "' has zero temporal variance");
        active().add_scalar(rec.signal.data() + i * t, -mean, centered.data() + i * t, t);
        inv_sd[i] = 1.0 / std::sqrt(var);
    }
    ConnectivityMatrix fc;
    fc.subject_id = rec.subject_id;
    fc.label = rec.label;
    fc.regions = v;
    fc.values.assign(v * v, 0.0);
    const double inv_t = 1.0 / static_cast<double>(t);
    for (std::size_t i = 0; i < v; ++i) {
        fc.values[i * v + i] = 1.0;
        for (std::size_t j = i + 1; j < v; ++j) {
            const double cov =
                active().dot(centered.data() + i * t, centered.data() + j * t, t) * inv_t;
            double r = cov * inv_sd[i] * inv_sd[j];
            r = std::clamp(r, -1.0, 1.0);
            fc.values[i * v + j] = r;
            fc.values[j * v + i] = r;
        }
    }
    return fc;
}

namespace {

std::vector<double> parse_csv_row(const std::string& line, const std::filesystem::path& file,
                                  std::size_t line_no) {
    std::vector<double> out;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
        while (p < end && (*p == ' ' || *p == '\t')) ++p;
        double v = 0.0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc())
            throw FormatError(file.string() + ":" + std::to_string(line_no) +
                              ": cannot parse number");
        out.push_back(v);
        p = next;
        while (p < end && (*p == ' ' || *p == '\t')) ++p;
        if (p < end) {
            if (*p != ',')
                throw FormatError(file.string() + ":" + std::to_string(line_no) +
                                  ": expected ',' between values");
            ++p;
        }
    }
    return out;
}

// reads a T x V CSV and stores it region-major (V x T)
BoldRecording read_signal_csv(const std::filesystem::path& file, const std::string& subject_id,
                              const std::string& label) {
    std::ifstream in(file);
    if (!in) throw FormatError("cannot open signal file " + file.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto vals = parse_csv_row(line, file, line_no);
        if (!rows.empty() && vals.size() != rows.front().size())
            throw FormatError(file.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(rows.front().size()) + " columns, got " +
                              std::to_string(vals.size()));
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw FormatError("signal file " + file.string() + " is empty");
    BoldRecording rec;
    rec.subject_id = subject_id;
    rec.label = label;
    rec.timepoints = rows.size();
    rec.regions = rows.front().size();
    rec.signal.resize(rec.regions * rec.timepoints);
    for (std::size_t t = 0; t < rec.timepoints; ++t)
        for (std::size_t r = 0; r < rec.regions; ++r)
            rec.signal[r * rec.timepoints + t] = rows[t][r];
    return rec;
}

} // namespace

std::vector<BoldRecording> load_cohort(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw FormatError("cannot open " + manifest_path.string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(manifest_path.string() + ": " + e.what());
    }
    if (!manifest.contains("subjects") || !manifest["subjects"].is_array())
        throw FormatError(manifest_path.string() + ": missing 'subjects' array");
    std::vector<BoldRecording> cohort;
    for (const auto& entry : manifest["subjects"]) {
        if (!entry.contains("subject_id") || !entry.contains("label") || !entry.contains("signal"))
            throw FormatError(manifest_path.string() +
                              ": subject entry needs subject_id, label and signal fields");
        auto rec = read_signal_csv(dir / entry["signal"].get<std::string>(),
                                   entry["subject_id"].get<std::string>(),
                                   entry["label"].get<std::string>());
        if (!cohort.empty() && rec.regions != cohort.front().regions)
            throw FormatError("subject '" + rec.subject_id + "' has " +
                              std::to_string(rec.regions) + " regions, cohort has " +
                              std::to_string(cohort.front().regions));
        rec.validate(true);
        cohort.push_back(std::move(rec));
    }
    if (manifest.contains("regions") && !cohort.empty() &&
        manifest["regions"].get<std::size_t>() != cohort.front().regions)
        throw FormatError(manifest_path.string() + ": declared region count does not match data");
    return cohort;
}

void save_cohort(const std::filesystem::path& dir, std::span<const BoldRecording> cohort) {
    if (cohort.empty()) throw DegenerateInputError("save_cohort: cohort is empty");
    std::filesystem::create_directories(dir / "signals");
    nlohmann::json manifest;
    manifest["format"] = "braintune-dataset";
    manifest["version"] = 1;
    manifest["regions"] = cohort.front().regions;
    manifest["subjects"] = nlohmann::json::array();
    for (const auto& rec : cohort) {
        const std::string rel = "signals/" + rec.subject_id + ".csv";
        std::ofstream out(dir / rel);
        if (!out) throw FormatError("cannot write " + (dir / rel).string());
        for (std::size_t t = 0; t < rec.timepoints; ++t) {
            std::string line;
            for (std::size_t r = 0; r < rec.regions; ++r) {
                if (r) line += ',';
                line += format_double(rec.signal[r * rec.timepoints + t]);
            }
            out << line << '\n';
        }
        manifest["subjects"].push_back(
            {{"subject_id", rec.subject_id}, {"label", rec.label}, {"signal", rel}});
    }
    std::ofstream mout(dir / "manifest.json");
    if (!mout) throw FormatError("cannot write " + (dir / "manifest.json").string());
    mout << manifest.dump(2) << '\n';
}

std::vector<ConnectivityMatrix> cohort_connectivity(std::span<const BoldRecording> cohort) {
    std::vector<ConnectivityMatrix> out;
    out.reserve(cohort.size());
    for (const auto& rec : cohort) out.push_back(pearson_fc(rec));
    return out;
}

} // namespace braintune
