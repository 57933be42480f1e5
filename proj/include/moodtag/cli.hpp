#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "moodtag/audio_io.hpp"
#include "moodtag/classifier.hpp"
#include "moodtag/dataset.hpp"
#include "moodtag/features.hpp"

namespace moodtag::cli {

enum ExitCode : int { kOk = 0, kDataError = 1, kUsageError = 2 };

struct PipelineConfig {
    PreprocessOptions preprocess;
    FeatureConfig features;
    TrainParams train;
    std::size_t jobs = 1;
    std::uint64_t seed = 42;
};

// key = value lines; '#' comments and [section] headers are ignored. Unknown
// keys and unparsable values throw SchemaError.
void apply_config_file(const std::filesystem::path& path, PipelineConfig& config);
void apply_config_text(const std::string& text, PipelineConfig& config);

struct ManifestRow {
    std::filesystem::path path;  // resolved against the manifest directory
    std::string part_id;
    std::optional<Label> label;
    double start_seconds = 0.0;
};

// CSV with header columns path,label[,start]. Throws SchemaError on layout or
// label problems, Error when the file cannot be read.
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path, bool require_labels = true);

struct ExtractOutcome {
    LabeledDataset dataset;
    std::vector<std::string> failures;  // "<path>: <reason>", manifest order
};

ExtractOutcome extract_all(const std::vector<ManifestRow>& rows, const PipelineConfig& config,
                           const std::optional<std::filesystem::path>& spectrogram_dir = std::nullopt);

// Subcommands. Each returns an ExitCode and writes diagnostics to `err`.
int cmd_extract(const std::filesystem::path& manifest, const std::filesystem::path& out, const PipelineConfig& config,
                std::ostream& log, std::ostream& err,
                const std::optional<std::filesystem::path>& spectrogram_dir = std::nullopt);
int cmd_separability(const std::filesystem::path& features, const std::filesystem::path& out_dir,
                     const PipelineConfig& config, std::ostream& log, std::ostream& err);
int cmd_train(const std::filesystem::path& features, const std::filesystem::path& model_out,
              const PipelineConfig& config, std::ostream& log, std::ostream& err);
int cmd_evaluate(const std::filesystem::path& features, const std::optional<std::filesystem::path>& out_dir,
                 const PipelineConfig& config, std::ostream& log, std::ostream& err);
// Inputs are WAV files (each read from second 0) or feature CSVs; a manifest
// may be given instead.
int cmd_predict(const std::filesystem::path& model, const std::vector<std::filesystem::path>& inputs,
                const std::optional<std::filesystem::path>& manifest, const std::optional<std::filesystem::path>& out,
                const PipelineConfig& config, std::ostream& log, std::ostream& err);

// Full argv front end.
int run(int argc, char** argv, std::ostream& log, std::ostream& err);

}  // namespace moodtag::cli
