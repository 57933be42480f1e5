#include "moodtag/dataset.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "moodtag/csv.hpp"
#include "moodtag/error.hpp"

namespace moodtag {

namespace {

std::shared_ptr<const FeatureSchema> match_schema(const std::vector<std::string>& columns,
                                                  const FeatureConfig& config) {
    FeatureConfig alternate = config;
    alternate.mfcc_first = config.mfcc_first == 0 ? 1 : 0;
    for (const auto& candidate : {config, alternate}) {
        auto schema = feature_schema(candidate);
        if (schema->names() == columns) return schema;
    }
    throw SchemaError("feature columns do not match the expected schema (" + std::to_string(columns.size()) +
                      " feature columns, expected " + std::to_string(feature_schema(config)->size()) + ")");
}

std::optional<Label> label_cell(const std::string& text, std::size_t line) {
    if (text.empty()) return std::nullopt;
    const auto label = parse_label(text);
    if (!label) {
        throw SchemaError("line " + std::to_string(line) + ": unknown label '" + text + "'");
    }
    return label;
}

double number_cell(const std::string& text, std::size_t line, const std::string& column) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw SchemaError("line " + std::to_string(line) + ", column '" + column + "': not a number: '" + text + "'");
    }
    return v;
}

}  // namespace

void validate_labeled(const LabeledDataset& ds) {
    std::set<std::string> seen;
    for (const auto& row : ds.rows) {
        if (!seen.insert(row.part_id).second) {
            throw Error("duplicate part id '" + row.part_id + "'");
        }
        if (!row.label) {
            throw Error("part '" + row.part_id + "' has no label");
        }
        if (row.features.size() != ds.dimension()) {
            throw Error("part '" + row.part_id + "' has " + std::to_string(row.features.size()) + " features, expected " +
                        std::to_string(ds.dimension()));
        }
        for (std::size_t i = 0; i < row.features.size(); ++i) {
            if (!std::isfinite(row.features[i])) {
                throw Error("part '" + row.part_id + "': feature '" + ds.schema->name(i) + "' is not finite");
            }
        }
    }
}

std::array<std::size_t, kLabelCount> label_counts(const LabeledDataset& ds) {
    std::array<std::size_t, kLabelCount> counts{};
    for (const auto& row : ds.rows) {
        if (row.label) ++counts[label_index(*row.label)];
    }
    return counts;
}

void write_feature_csv(std::ostream& out, const LabeledDataset& ds) {
    std::vector<std::string> header = {"part_id", "label"};
    header.insert(header.end(), ds.schema->names().begin(), ds.schema->names().end());
    out << csv::join(header) << '\n';
    for (const auto& row : ds.rows) {
        std::vector<std::string> fields = {row.part_id, row.label ? std::string(label_name(*row.label)) : ""};
        for (double v : row.features) fields.push_back(csv::format_number(v));
        out << csv::join(fields) << '\n';
    }
}

void write_feature_csv(const std::filesystem::path& path, const LabeledDataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_feature_csv(out, ds);
    if (!out) throw Error("write failed: " + path.string());
}

LabeledDataset read_feature_csv(std::istream& in, const FeatureConfig& config) {
    std::string line;
    if (!csv::read_line(in, line)) {
        throw SchemaError("feature CSV is empty");
    }
    auto header = csv::split(line);
    if (header.size() < 2 || header[0] != "part_id" || header[1] != "label") {
        throw SchemaError("feature CSV header must start with part_id,label");
    }
    const std::vector<std::string> columns(header.begin() + 2, header.end());
    LabeledDataset ds;
    ds.schema = match_schema(columns, config);

    std::size_t line_no = 1;
    while (csv::read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = csv::split(line);
        if (fields.size() != header.size()) {
            throw SchemaError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                              " fields, found " + std::to_string(fields.size()));
        }
        DatasetRow row;
        row.part_id = fields[0];
        row.label = label_cell(fields[1], line_no);
        row.features.reserve(columns.size());
        for (std::size_t i = 0; i < columns.size(); ++i) {
            row.features.push_back(number_cell(fields[i + 2], line_no, columns[i]));
        }
        ds.rows.push_back(std::move(row));
    }
    return ds;
}

LabeledDataset read_feature_csv(const std::filesystem::path& path, const FeatureConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return read_feature_csv(in, config);
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

void write_feature_json(const std::filesystem::path& path, const LabeledDataset& ds) {
    nlohmann::json doc;
    doc["columns"] = ds.schema->names();
    doc["rows"] = nlohmann::json::array();
    for (const auto& row : ds.rows) {
        nlohmann::json r;
        r["part_id"] = row.part_id;
        r["label"] = row.label ? nlohmann::json(std::string(label_name(*row.label))) : nlohmann::json(nullptr);
        r["values"] = row.features;
        doc["rows"].push_back(std::move(r));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

LabeledDataset read_feature_json(const std::filesystem::path& path, const FeatureConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
        LabeledDataset ds;
        ds.schema = match_schema(doc.at("columns").get<std::vector<std::string>>(), config);
        std::size_t index = 0;
        for (const auto& r : doc.at("rows")) {
            ++index;
            DatasetRow row;
            row.part_id = r.at("part_id").get<std::string>();
            if (!r.at("label").is_null()) row.label = label_cell(r.at("label").get<std::string>(), index);
            row.features = r.at("values").get<std::vector<double>>();
            if (row.features.size() != ds.dimension()) {
                throw SchemaError("row " + std::to_string(index) + ": wrong number of values");
            }
            ds.rows.push_back(std::move(row));
        }
        return ds;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

}  // namespace moodtag
