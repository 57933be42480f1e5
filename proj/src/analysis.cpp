#include "moodtag/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

#include "moodtag/csv.hpp"
#include "moodtag/error.hpp"

namespace moodtag {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string() + ": could not open file");
    return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error("cannot write " + path.string() + ": write failed");
}

std::string fixed2(double v) {
    if (std::isinf(v)) return "inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

}  // namespace

double fisher_separability(std::span<const double> a, std::span<const double> b, StdConvention convention) {
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument("fisher_separability: each class needs at least 2 samples");
    }
    const auto sa = mean_std(a, convention);
    const auto sb = mean_std(b, convention);
    const double gap = sa.mean - sb.mean;
    const double pooled = sa.std * sa.std + sb.std * sb.std;
    if (pooled == 0.0) {
        return gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return gap * gap / pooled;
}

LabelStats compute_label_stats(const LabeledDataset& ds, StdConvention convention) {
    LabelStats stats;
    const auto counts = label_counts(ds);
    for (Label label : kAllLabels) {
        if (counts[label_index(label)] == 0) continue;
        stats.labels.push_back(label);
        std::vector<double> means, stds;
        for (std::size_t f = 0; f < ds.dimension(); ++f) {
            std::vector<double> column;
            for (const auto& row : ds.rows) {
                if (row.label == label) column.push_back(row.features[f]);
            }
            const auto s = mean_std(column, convention);
            means.push_back(s.mean);
            stds.push_back(s.std);
        }
        stats.mean.push_back(std::move(means));
        stats.stddev.push_back(std::move(stds));
    }
    return stats;
}

SeparabilityMatrix pairwise_max_separability(const LabeledDataset& ds, StdConvention convention) {
    validate_labeled(ds);
    const auto counts = label_counts(ds);
    SeparabilityMatrix m;
    m.schema = ds.schema;
    for (Label label : kAllLabels) {
        const std::size_t count = counts[label_index(label)];
        if (count == 0) continue;
        if (count < 2) {
            throw Error("label " + std::string(label_name(label)) + " has fewer than 2 samples");
        }
        m.labels.push_back(label);
    }
    if (m.labels.size() < 2) {
        throw Error("need at least 2 labels");
    }

    // columns[label][feature] -> samples
    const std::size_t n = m.size();
    const std::size_t d = ds.dimension();
    std::vector<std::vector<std::vector<double>>> columns(n, std::vector<std::vector<double>>(d));
    for (const auto& row : ds.rows) {
        std::size_t li = 0;
        while (m.labels[li] != *row.label) ++li;
        for (std::size_t f = 0; f < d; ++f) columns[li][f].push_back(row.features[f]);
    }

    m.values.assign(n * n, kNaN);
    m.best_feature.assign(n * n, std::nullopt);
    m.best_group.assign(n * n, std::nullopt);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double best = -1.0;
            std::size_t best_f = 0;
            for (std::size_t f = 0; f < d; ++f) {
                const double s = fisher_separability(columns[i][f], columns[j][f], convention);
                if (s > best) {
                    best = s;
                    best_f = f;
                }
            }
            for (const auto& [a, b] : {std::pair{i, j}, std::pair{j, i}}) {
                m.values[a * n + b] = best;
                m.best_feature[a * n + b] = best_f;
                m.best_group[a * n + b] = ds.schema->group(best_f);
            }
        }
    }
    return m;
}

std::vector<LabelSummary> label_summary(const SeparabilityMatrix& m, StdConvention convention) {
    std::vector<LabelSummary> out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        std::vector<double> row;
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (i != j) row.push_back(m.value(i, j));
        }
        const auto s = mean_std(row, convention);
        out.push_back({m.labels[i], s.mean, s.std});
    }
    return out;
}

ReportFiles emit_reports(const SeparabilityMatrix& m, const std::vector<LabelSummary>& summary,
                         const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());

    ReportFiles files{out_dir / "separability.csv", out_dir / "separability_groups.csv",
                      out_dir / "separability_summary.csv", out_dir / "separability_report.txt"};
    const std::size_t n = m.size();

    std::vector<std::string> header = {"label"};
    for (Label l : m.labels) header.push_back(label_title(l));

    {
        auto out = open_out(files.matrix_csv);
        out << csv::join(header) << '\n';
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::string> fields = {label_title(m.labels[i])};
            for (std::size_t j = 0; j < n; ++j) fields.push_back(i == j ? "-" : csv::format_exact(m.value(i, j)));
            out << csv::join(fields) << '\n';
        }
        check_written(out, files.matrix_csv);
    }
    {
        auto out = open_out(files.groups_csv);
        out << csv::join(header) << '\n';
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::string> fields = {label_title(m.labels[i])};
            for (std::size_t j = 0; j < n; ++j) {
                const auto g = m.group(i, j);
                fields.push_back(i == j || !g ? "-" : std::string(group_name(*g)));
            }
            out << csv::join(fields) << '\n';
        }
        check_written(out, files.groups_csv);
    }
    {
        auto out = open_out(files.summary_csv);
        out << "label,average,std\n";
        for (const auto& s : summary) {
            out << label_title(s.label) << ',' << csv::format_number(s.average) << ',' << csv::format_number(s.std)
                << '\n';
        }
        check_written(out, files.summary_csv);
    }
    {
        auto out = open_out(files.text_report);
        constexpr std::size_t w = 11;
        auto table_header = [&](const std::string& title) {
            out << title << "\n\n" << pad("Label", w);
            for (Label l : m.labels) out << pad(label_title(l), w);
            out << '\n';
        };
        table_header("Maximum separability");
        for (std::size_t i = 0; i < n; ++i) {
            out << pad(label_title(m.labels[i]), w);
            for (std::size_t j = 0; j < n; ++j) out << pad(i == j ? "-" : fixed2(m.value(i, j)), w);
            out << '\n';
        }
        out << '\n';
        table_header("Feature group causing the maximum separability");
        for (std::size_t i = 0; i < n; ++i) {
            out << pad(label_title(m.labels[i]), w);
            for (std::size_t j = 0; j < n; ++j) {
                const auto g = m.group(i, j);
                out << pad(i == j || !g ? "-" : std::string(group_name(*g)), w);
            }
            out << '\n';
        }
        out << '\n';
        out << "Average and standard deviation of maximum separability\n\n" << pad("Label", w);
        for (const auto& s : summary) out << pad(label_title(s.label), w);
        out << '\n' << pad("Average", w);
        for (const auto& s : summary) out << pad(fixed2(s.average), w);
        out << '\n' << pad("STD", w);
        for (const auto& s : summary) out << pad(fixed2(s.std), w);
        out << '\n';
        if (m.schema) {
            out << "\nStrongest feature per pair\n\n";
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    const auto f = m.best_feature[i * n + j];
                    if (!f) continue;
                    out << label_title(m.labels[i]) << " / " << label_title(m.labels[j]) << ": " << m.schema->name(*f)
                        << " (" << fixed2(m.value(i, j)) << ")\n";
                }
            }
        }
        check_written(out, files.text_report);
    }
    return files;
}

SeparabilityMatrix read_separability_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    if (!csv::read_line(in, line)) throw SchemaError(path.string() + ": empty matrix file");
    const auto header = csv::split(line);
    if (header.empty() || header[0] != "label") throw SchemaError(path.string() + ": header must start with 'label'");
    SeparabilityMatrix m;
    for (std::size_t j = 1; j < header.size(); ++j) {
        const auto label = parse_label(header[j]);
        if (!label) throw SchemaError(path.string() + ": unknown label '" + header[j] + "'");
        m.labels.push_back(*label);
    }
    const std::size_t n = m.labels.size();
    m.values.assign(n * n, kNaN);
    m.best_feature.assign(n * n, std::nullopt);
    m.best_group.assign(n * n, std::nullopt);
    for (std::size_t i = 0; i < n; ++i) {
        if (!csv::read_line(in, line)) throw SchemaError(path.string() + ": missing row " + std::to_string(i + 1));
        const auto fields = csv::split(line);
        if (fields.size() != n + 1 || parse_label(fields[0]) != m.labels[i]) {
            throw SchemaError(path.string() + ": malformed row " + std::to_string(i + 1));
        }
        for (std::size_t j = 0; j < n; ++j) {
            const std::string& cell = fields[j + 1];
            if (cell == "-") continue;
            try {
                m.values[i * n + j] = std::stod(cell);
            } catch (const std::exception&) {
                throw SchemaError(path.string() + ": bad value '" + cell + "'");
            }
        }
    }
    return m;
}

}  // namespace moodtag
