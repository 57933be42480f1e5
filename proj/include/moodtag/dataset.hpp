#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "moodtag/features.hpp"
#include "moodtag/labels.hpp"

namespace moodtag {

struct DatasetRow {
    std::string part_id;
    std::optional<Label> label;  // empty for unlabeled prediction inputs
    std::vector<double> features;
};

// Feature table: the rows share one schema and keep file order.
struct LabeledDataset {
    std::shared_ptr<const FeatureSchema> schema;
    std::vector<DatasetRow> rows;

    std::size_t dimension() const { return schema ? schema->size() : 0; }
};

// Throws Error when ids repeat, a row lacks a label, a value is not finite or
// a row width disagrees with the schema.
void validate_labeled(const LabeledDataset& ds);

// Number of rows per label, indexed by label_index.
std::array<std::size_t, kLabelCount> label_counts(const LabeledDataset& ds);

// "part_id,label,<feature names>"; values with 9 significant digits.
void write_feature_csv(std::ostream& out, const LabeledDataset& ds);
void write_feature_csv(const std::filesystem::path& path, const LabeledDataset& ds);

// The header must match the schema of `config` exactly, or the schema with
// the other MFCC numbering; anything else is a SchemaError. Unknown labels
// are schema errors; an empty label cell leaves the row unlabeled.
LabeledDataset read_feature_csv(std::istream& in, const FeatureConfig& config = {});
LabeledDataset read_feature_csv(const std::filesystem::path& path, const FeatureConfig& config = {});

// JSON mirror of the CSV: {"columns": [...], "rows": [{"part_id", "label", "values"}]}.
void write_feature_json(const std::filesystem::path& path, const LabeledDataset& ds);
LabeledDataset read_feature_json(const std::filesystem::path& path, const FeatureConfig& config = {});

}  // namespace moodtag
