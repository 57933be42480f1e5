#include "moodtag/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "moodtag/analysis.hpp"
#include "moodtag/csv.hpp"
#include "moodtag/error.hpp"
#include "moodtag/spectral.hpp"
#include "moodtag/synthetic.hpp"

namespace moodtag::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string s) {
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

double to_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size()) throw SchemaError("config: '" + key + "' expects a number, got '" + value + "'");
    return v;
}

long to_int(const std::string& key, const std::string& value) {
    const double v = to_double(key, value);
    if (v != std::floor(v) || v < 0) throw SchemaError("config: '" + key + "' expects a non-negative integer");
    return static_cast<long>(v);
}

std::string part_id_for(const std::string& path_text, double start) {
    if (start == 0.0) return path_text;
    return path_text + "@" + csv::format_number(start);
}

std::string pct(std::optional<double> v) {
    if (!v) return "-";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * *v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

void write_eval_text(std::ostream& out, const EvalReport& report) {
    constexpr std::size_t w = 13;
    out << pad("Label", w);
    for (Label l : kAllLabels) out << pad(label_title(l), 10);
    out << '\n' << pad("Accuracy (%)", w);
    for (Label l : kAllLabels) out << pad(pct(report.per_label_accuracy[label_index(l)]), 10);
    out << "\n\nOverall accuracy: " << pct(report.overall_accuracy) << "%\n\n";
    out << "Confusion matrix (rows: true label, columns: predicted)\n" << pad("", w);
    for (Label l : kAllLabels) out << pad(label_title(l), 10);
    out << '\n';
    for (Label t : kAllLabels) {
        out << pad(label_title(t), w);
        for (Label p : kAllLabels) out << pad(std::to_string(report.confusion[label_index(t)][label_index(p)]), 10);
        out << '\n';
    }
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
}

bool has_extension(const std::filesystem::path& p, std::string_view ext) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e == ext;
}

LabeledDataset read_features_any(const std::filesystem::path& path, const FeatureConfig& config) {
    if (!std::filesystem::exists(path)) {
        throw SchemaError("feature file not found: " + path.string());
    }
    return has_extension(path, ".json") ? read_feature_json(path, config) : read_feature_csv(path, config);
}

}  // namespace

void apply_config_text(const std::string& text, PipelineConfig& config) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty() || line.front() == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw SchemaError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        if (key == "sample_rate") {
            config.preprocess.sample_rate = static_cast<int>(to_int(key, value));
        } else if (key == "peak_target") {
            config.preprocess.peak_target = to_double(key, value);
        } else if (key == "n_frames") {
            config.features.n_frames = static_cast<std::size_t>(to_int(key, value));
        } else if (key == "n_subbands") {
            config.features.n_subbands = static_cast<int>(to_int(key, value));
        } else if (key == "mfcc_count") {
            config.features.mfcc_count = static_cast<int>(to_int(key, value));
        } else if (key == "mfcc_first") {
            config.features.mfcc_first = static_cast<int>(to_int(key, value));
        } else if (key == "mel_filters") {
            config.features.mel_filters = static_cast<int>(to_int(key, value));
        } else if (key == "mode_sign") {
            if (value == "major_minus_minor") {
                config.features.mode_sign = ModeSign::MajorMinusMinor;
            } else if (value == "minor_minus_major") {
                config.features.mode_sign = ModeSign::MinorMinusMajor;
            } else {
                throw SchemaError("config: mode_sign must be major_minus_minor or minor_minus_major");
            }
        } else if (key == "kernel") {
            const auto k = parse_kernel(value);
            if (!k) throw SchemaError("config: kernel must be linear or rbf");
            config.train.kernel = *k;
        } else if (key == "c") {
            config.train.c = to_double(key, value);
        } else if (key == "gamma") {
            config.train.gamma = to_double(key, value);
        } else if (key == "tolerance") {
            config.train.tolerance = to_double(key, value);
        } else if (key == "max_iterations") {
            config.train.max_iterations = static_cast<std::size_t>(to_int(key, value));
        } else if (key == "jobs") {
            config.jobs = static_cast<std::size_t>(to_int(key, value));
        } else if (key == "seed") {
            config.seed = static_cast<std::uint64_t>(to_int(key, value));
        } else {
            throw SchemaError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
}

void apply_config_file(const std::filesystem::path& path, PipelineConfig& config) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        apply_config_text(ss.str(), config);
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path, bool require_labels) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot read manifest " + path.string());
    std::string line;
    if (!csv::read_line(in, line)) throw SchemaError(path.string() + ": manifest is empty");
    const auto header = csv::split(line);
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == name) return i;
        }
        return std::nullopt;
    };
    const auto path_col = column("path");
    const auto label_col = column("label");
    const auto start_col = column("start");
    if (!path_col) throw SchemaError(path.string() + ": manifest header needs a 'path' column");
    if (require_labels && !label_col) throw SchemaError(path.string() + ": manifest header needs a 'label' column");

    const auto base = path.parent_path();
    std::vector<ManifestRow> rows;
    std::size_t line_no = 1;
    while (csv::read_line(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = csv::split(line);
        if (fields.size() != header.size()) {
            throw SchemaError(path.string() + ", line " + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " fields");
        }
        ManifestRow row;
        const std::string path_text = trim(fields[*path_col]);
        if (path_text.empty()) throw SchemaError(path.string() + ", line " + std::to_string(line_no) + ": empty path");
        const std::filesystem::path audio(path_text);
        row.path = audio.is_absolute() ? audio : base / audio;
        if (label_col) {
            const std::string text = trim(fields[*label_col]);
            if (!text.empty()) {
                row.label = parse_label(text);
                if (!row.label) {
                    throw SchemaError(path.string() + ", line " + std::to_string(line_no) + ": unknown label '" +
                                      text + "'");
                }
            }
        }
        if (require_labels && !row.label) {
            throw SchemaError(path.string() + ", line " + std::to_string(line_no) + ": missing label");
        }
        if (start_col && !trim(fields[*start_col]).empty()) {
            row.start_seconds = to_double("start", trim(fields[*start_col]));
            if (row.start_seconds < 0) {
                throw SchemaError(path.string() + ", line " + std::to_string(line_no) + ": negative start");
            }
        }
        row.part_id = part_id_for(path_text, row.start_seconds);
        rows.push_back(std::move(row));
    }
    return rows;
}

ExtractOutcome extract_all(const std::vector<ManifestRow>& rows, const PipelineConfig& config,
                           const std::optional<std::filesystem::path>& spectrogram_dir) {
    const std::size_t n = rows.size();
    std::vector<std::optional<DatasetRow>> results(n);
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            const auto& row = rows[i];
            try {
                const auto decoded = read_wav(row.path);
                const auto part = preprocess(decoded, row.start_seconds, row.part_id, config.preprocess);
                auto fv = extract_features(part, config.features);
                if (spectrogram_dir) {
                    const auto plan = make_frame_plan(part.buffer.samples.size(), config.features.n_frames);
                    write_spectrogram_csv(compute_spectrogram(part, plan),
                                          *spectrogram_dir / ("spectrogram_" + std::to_string(i) + ".csv"));
                }
                results[i] = DatasetRow{row.part_id, row.label, std::move(fv.values)};
            } catch (const std::exception& e) {
                errors[i] = row.path.string() + ": " + e.what();
            }
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(config.jobs, n));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    ExtractOutcome outcome;
    outcome.dataset.schema = feature_schema(config.features);
    for (std::size_t i = 0; i < n; ++i) {
        if (results[i]) {
            outcome.dataset.rows.push_back(std::move(*results[i]));
        } else {
            outcome.failures.push_back(std::move(errors[i]));
        }
    }
    return outcome;
}

int cmd_extract(const std::filesystem::path& manifest, const std::filesystem::path& out, const PipelineConfig& config,
                std::ostream& log, std::ostream& err, const std::optional<std::filesystem::path>& spectrogram_dir) {
    return guarded(err, [&] {
        const auto rows = read_manifest(manifest, true);
        if (spectrogram_dir) std::filesystem::create_directories(*spectrogram_dir);
        const auto outcome = extract_all(rows, config, spectrogram_dir);
        if (has_extension(out, ".json")) {
            write_feature_json(out, outcome.dataset);
        } else {
            write_feature_csv(out, outcome.dataset);
        }
        log << "extracted " << outcome.dataset.rows.size() << " of " << rows.size() << " parts -> " << out.string()
            << '\n';
        if (!outcome.failures.empty()) {
            err << outcome.failures.size() << " file(s) failed:\n";
            for (const auto& f : outcome.failures) err << "  " << f << '\n';
            return int{kDataError};
        }
        return int{kOk};
    });
}

int cmd_separability(const std::filesystem::path& features, const std::filesystem::path& out_dir,
                     const PipelineConfig& config, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        const auto ds = read_features_any(features, config.features);
        const auto matrix = pairwise_max_separability(ds);
        const auto summary = label_summary(matrix);
        const auto files = emit_reports(matrix, summary, out_dir);
        std::ifstream report(files.text_report);
        log << report.rdbuf();
        return int{kOk};
    });
}

int cmd_train(const std::filesystem::path& features, const std::filesystem::path& model_out,
              const PipelineConfig& config, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        const auto ds = read_features_any(features, config.features);
        const auto model = train(ds, config.train);
        save_model(model, model_out);
        log << "trained " << model.pairs.size() << " pairwise models over " << model.classes.size() << " labels ("
            << kernel_name(model.kernel.type) << ", C=" << model.params.c << ", gamma=" << model.kernel.gamma
            << ") -> " << model_out.string() << '\n';
        if (!model.converged()) err << "warning: some pairwise models hit the iteration bound\n";
        return int{kOk};
    });
}

int cmd_evaluate(const std::filesystem::path& features, const std::optional<std::filesystem::path>& out_dir,
                 const PipelineConfig& config, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        const auto ds = read_features_any(features, config.features);
        const auto report = loocv(ds, config.train, LoocvOptions{config.jobs, false});
        write_eval_text(log, report);
        if (report.unconverged_models) {
            err << "warning: " << report.unconverged_models << " fold(s) had unconverged pairwise models\n";
        }
        if (out_dir) {
            std::filesystem::create_directories(*out_dir);
            const auto csv_path = *out_dir / "evaluation.csv";
            std::ofstream csv_out(csv_path, std::ios::binary);
            if (!csv_out) throw Error("cannot write " + csv_path.string());
            csv_out << "label,accuracy,correct,count\n";
            for (Label l : kAllLabels) {
                const auto acc = report.per_label_accuracy[label_index(l)];
                csv_out << label_name(l) << ',' << (acc ? csv::format_number(*acc) : std::string("")) << ','
                        << report.confusion[label_index(l)][label_index(l)] << ',' << report.row_total(l) << '\n';
            }
            csv_out << "overall," << csv::format_number(report.overall_accuracy) << ",,"
                    << ds.rows.size() << '\n';
            std::ofstream txt(*out_dir / "confusion.txt", std::ios::binary);
            write_eval_text(txt, report);
            if (!csv_out || !txt) throw Error("cannot write evaluation reports to " + out_dir->string());
        }
        return int{kOk};
    });
}

int cmd_predict(const std::filesystem::path& model_path, const std::vector<std::filesystem::path>& inputs,
                const std::optional<std::filesystem::path>& manifest, const std::optional<std::filesystem::path>& out,
                const PipelineConfig& config, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        if (!std::filesystem::exists(model_path)) {
            throw SchemaError("model file not found: " + model_path.string());
        }
        if (inputs.empty() && !manifest) {
            throw SchemaError("predict needs input files or --manifest");
        }
        const auto model = load_model(model_path);
        const auto schema = feature_schema(config.features);

        std::vector<ManifestRow> audio;
        LabeledDataset tables;
        tables.schema = schema;
        if (manifest) {
            audio = read_manifest(*manifest, false);
        }
        for (const auto& in : inputs) {
            if (has_extension(in, ".csv") || has_extension(in, ".json")) {
                auto ds = read_features_any(in, config.features);
                for (auto& r : ds.rows) tables.rows.push_back(std::move(r));
            } else {
                audio.push_back({in, in.string(), std::nullopt, 0.0});
            }
        }
        auto outcome = extract_all(audio, config, std::nullopt);
        for (auto& r : tables.rows) outcome.dataset.rows.push_back(std::move(r));

        if (!model.feature_names.empty() && model.feature_names.size() != schema->size()) {
            throw SchemaError("model expects " + std::to_string(model.feature_names.size()) + " features, inputs have " +
                              std::to_string(schema->size()));
        }

        std::vector<std::string> lines = {"part_id,predicted_label"};
        for (const auto& row : outcome.dataset.rows) {
            const Label label = predict(model, row.features);
            lines.push_back(csv::join({row.part_id, std::string(label_name(label))}));
        }
        for (std::size_t i = 1; i < lines.size(); ++i) log << lines[i] << '\n';
        if (out) {
            std::ofstream f(*out, std::ios::binary);
            for (const auto& l : lines) f << l << '\n';
            if (!f) throw Error("cannot write " + out->string());
        }
        if (!outcome.failures.empty()) {
            err << outcome.failures.size() << " input(s) failed:\n";
            for (const auto& f : outcome.failures) err << "  " << f << '\n';
            return int{kDataError};
        }
        return int{kOk};
    });
}

int run(int argc, char** argv, std::ostream& log, std::ostream& err) {
    CLI::App app{"moodtag: music emotion features, label separability and SVM labelling"};
    app.require_subcommand(1);

    std::string config_path;
    std::string kernel;
    double c_value = 0.0;
    double gamma = 0.0;
    std::uint64_t seed = 0;
    std::size_t jobs = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value config file (flags override it)");
        sub->add_option("--jobs", jobs, "worker threads");
        sub->add_option("--seed", seed, "random seed (synthetic data)");
    };
    auto add_train_flags = [&](CLI::App* sub) {
        sub->add_option("--kernel", kernel, "linear or rbf")->check(CLI::IsMember({"linear", "rbf"}));
        sub->add_option("--c", c_value, "SVM penalty C");
        sub->add_option("--gamma", gamma, "RBF width (default 1 / (d * mean variance))");
    };

    std::string manifest, out, input, model, dump_dir;
    std::vector<std::string> inputs;

    auto* extract = app.add_subcommand("extract", "extract the feature table of a manifest");
    extract->add_option("--manifest", manifest, "CSV with path,label[,start]")->required();
    extract->add_option("--out", out, "feature table (.csv or .json)")->required();
    extract->add_option("--dump-spectrograms", dump_dir, "write per-part spectrogram CSVs here");
    add_common(extract);

    auto* separability = app.add_subcommand("separability", "pairwise Fisher separability of the labels");
    separability->add_option("features", input, "feature table")->required();
    separability->add_option("--out", out, "report directory")->required();
    add_common(separability);

    auto* train_cmd = app.add_subcommand("train", "train the one-vs-one SVM");
    train_cmd->add_option("features", input, "feature table")->required();
    train_cmd->add_option("--out", out, "model file")->required();
    add_common(train_cmd);
    add_train_flags(train_cmd);

    auto* evaluate = app.add_subcommand("evaluate", "leave-one-out accuracy per label");
    evaluate->add_option("features", input, "feature table")->required();
    evaluate->add_option("--out", out, "report directory");
    add_common(evaluate);
    add_train_flags(evaluate);

    auto* predict_cmd = app.add_subcommand("predict", "label WAV files or feature tables");
    predict_cmd->add_option("--model", model, "model file")->required();
    predict_cmd->add_option("inputs", inputs, "WAV files or feature tables");
    predict_cmd->add_option("--manifest", manifest, "CSV with a path column");
    predict_cmd->add_option("--out", out, "prediction CSV");
    add_common(predict_cmd);

    std::string synth_kind = "clusters";
    std::size_t synth_rows = 20;
    double separation = 8.0;
    auto* synth = app.add_subcommand("synth", "write a synthetic feature table (for trying the pipeline)");
    synth->add_option("kind", synth_kind, "clusters or noise")->check(CLI::IsMember({"clusters", "noise"}));
    synth->add_option("--rows", synth_rows, "rows per label (clusters) or total rows (noise)");
    synth->add_option("--separation", separation, "cluster centre distance in noise std units");
    synth->add_option("--out", out, "feature table")->required();
    add_common(synth);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, log, err);
        return code == 0 ? int{kOk} : int{kUsageError};
    }

    PipelineConfig config;
    const int config_status = guarded(err, [&] {
        if (!config_path.empty()) apply_config_file(config_path, config);
        auto given = [&](CLI::App* sub, const char* flag) {
            try {
                return sub->count(flag) > 0;
            } catch (const CLI::OptionNotFound&) {
                return false;
            }
        };
        for (auto* sub : app.get_subcommands()) {
            if (given(sub, "--jobs")) config.jobs = jobs;
            if (given(sub, "--kernel")) config.train.kernel = *parse_kernel(kernel);
            if (given(sub, "--c")) config.train.c = c_value;
            if (given(sub, "--gamma")) config.train.gamma = gamma;
            if (given(sub, "--seed")) config.seed = seed;
        }
        validate(config.train);
        return int{kOk};
    });
    if (config_status != kOk) return config_status;

    if (extract->parsed()) {
        std::optional<std::filesystem::path> dump;
        if (!dump_dir.empty()) dump = dump_dir;
        return cmd_extract(manifest, out, config, log, err, dump);
    }
    if (separability->parsed()) return cmd_separability(input, out, config, log, err);
    if (train_cmd->parsed()) return cmd_train(input, out, config, log, err);
    if (evaluate->parsed()) {
        std::optional<std::filesystem::path> dir;
        if (!out.empty()) dir = out;
        return cmd_evaluate(input, dir, config, log, err);
    }
    if (predict_cmd->parsed()) {
        std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
        std::optional<std::filesystem::path> man, dest;
        if (!manifest.empty()) man = manifest;
        if (!out.empty()) dest = out;
        return cmd_predict(model, paths, man, dest, config, log, err);
    }
    if (synth->parsed()) {
        return guarded(err, [&] {
            const auto ds = synth_kind == "noise" ? synthetic::random_labels(synth_rows, config.seed)
                                                  : synthetic::gaussian_clusters(synth_rows, separation, config.seed);
            write_feature_csv(std::filesystem::path(out), ds);
            log << "wrote " << ds.rows.size() << " synthetic rows -> " << out << '\n';
            return int{kOk};
        });
    }
    return int{kUsageError};
}

}  // namespace moodtag::cli
