#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "moodtag/dataset.hpp"
#include "moodtag/features.hpp"
#include "moodtag/labels.hpp"
#include "moodtag/stats.hpp"

namespace moodtag {

// (mu_a - mu_b)^2 / (sigma_a^2 + sigma_b^2). Zero pooled variance gives
// +infinity when the means differ and 0 when they agree. Each side needs at
// least two samples.
double fisher_separability(std::span<const double> a, std::span<const double> b,
                           StdConvention convention = StdConvention::Population);

// Per label, per feature mean and standard deviation.
struct LabelStats {
    std::vector<Label> labels;                // labels present, canonical order
    std::vector<std::vector<double>> mean;    // [label][feature]
    std::vector<std::vector<double>> stddev;  // [label][feature]
};

LabelStats compute_label_stats(const LabeledDataset& ds, StdConvention convention = StdConvention::Population);

// Symmetric table over the labels present in a dataset. Diagonal cells are NaN
// and carry no group.
struct SeparabilityMatrix {
    std::vector<Label> labels;
    std::vector<double> values;
    std::vector<std::optional<std::size_t>> best_feature;
    std::vector<std::optional<FeatureGroup>> best_group;
    std::shared_ptr<const FeatureSchema> schema;

    std::size_t size() const { return labels.size(); }
    double value(std::size_t i, std::size_t j) const { return values.at(i * size() + j); }
    std::optional<FeatureGroup> group(std::size_t i, std::size_t j) const { return best_group.at(i * size() + j); }
};

// For every label pair, the largest per-feature separability and the group of
// the feature reaching it (earliest column on ties).
SeparabilityMatrix pairwise_max_separability(const LabeledDataset& ds,
                                             StdConvention convention = StdConvention::Population);

struct LabelSummary {
    Label label;
    double average = 0.0;
    double std = 0.0;
};

// Mean and std of each row's off-diagonal entries. The sample convention is
// the default here; it is the one that reproduces published summaries.
std::vector<LabelSummary> label_summary(const SeparabilityMatrix& m, StdConvention convention = StdConvention::Sample);

struct ReportFiles {
    std::filesystem::path matrix_csv;
    std::filesystem::path groups_csv;
    std::filesystem::path summary_csv;
    std::filesystem::path text_report;
};

ReportFiles emit_reports(const SeparabilityMatrix& m, const std::vector<LabelSummary>& summary,
                         const std::filesystem::path& out_dir);

// Parses a matrix CSV written by emit_reports (labels and values only).
SeparabilityMatrix read_separability_csv(const std::filesystem::path& path);

}  // namespace moodtag
