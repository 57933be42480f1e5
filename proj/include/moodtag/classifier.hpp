#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "moodtag/dataset.hpp"
#include "moodtag/labels.hpp"

namespace moodtag {

enum class KernelType { Linear, Rbf };

std::string_view kernel_name(KernelType kernel);
std::optional<KernelType> parse_kernel(std::string_view name);

struct TrainParams {
    KernelType kernel = KernelType::Rbf;
    double c = 1.0;
    // Unset means 1 / (d * mean feature variance) of the standardized training rows.
    std::optional<double> gamma;
    double tolerance = 1e-3;
    std::size_t max_iterations = 100000;
};

// Throws std::invalid_argument unless C, gamma (when set) and tolerance are positive.
void validate(const TrainParams& params);

struct Kernel {
    KernelType type = KernelType::Rbf;
    double gamma = 1.0;

    double operator()(std::span<const double> a, std::span<const double> b) const;
};

// z-scores with per-column mean and population std taken from training rows.
class Standardizer {
public:
    static constexpr double kStdFloor = 1e-12;

    Standardizer() = default;
    Standardizer(std::vector<double> mean, std::vector<double> scale);

    // Throws Error on empty input.
    static Standardizer fit(const std::vector<std::vector<double>>& rows);

    // Columns whose std fell below the floor map to 0.
    std::vector<double> apply(std::span<const double> row) const;

    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& scale() const { return scale_; }
    std::size_t dimension() const { return mean_.size(); }

private:
    std::vector<double> mean_;
    std::vector<double> scale_;
};

// decision(x) = sum_i coef_i K(sv_i, x) + bias; positive means the first class.
struct BinaryModel {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> alpha;  // in [0, C]
    std::vector<double> coef;   // alpha_i * y_i
    double bias = 0.0;
    bool converged = true;
    std::size_t iterations = 0;

    double decision(std::span<const double> x, const Kernel& kernel) const;
};

// SMO on the dual with the maximal violating pair chosen each step (lowest
// index on ties). Rows of each class are sorted first, so the solution does not
// depend on input order. When max_iterations is hit the current iterate is
// returned with converged == false.
BinaryModel train_binary(const std::vector<std::vector<double>>& first_class,
                         const std::vector<std::vector<double>>& second_class, const Kernel& kernel,
                         const TrainParams& params);

// Largest KKT residual (in units of y f(x) - 1) over the training rows.
double max_kkt_violation(const BinaryModel& model, const std::vector<std::vector<double>>& first_class,
                         const std::vector<std::vector<double>>& second_class, const Kernel& kernel, double c);

struct PairModel {
    std::size_t first = 0;   // index into SvmModel::classes
    std::size_t second = 0;
    BinaryModel model;
};

struct SvmModel {
    std::vector<Label> classes;
    std::vector<std::string> feature_names;
    Standardizer standardizer;
    TrainParams params;  // gamma resolved
    Kernel kernel;
    std::vector<PairModel> pairs;

    std::size_t dimension() const { return standardizer.dimension(); }
    bool converged() const;
};

// One-vs-one over the labels present (at least two).
SvmModel train(const LabeledDataset& ds, const TrainParams& params = {});

struct Prediction {
    Label label;
    std::vector<int> votes;             // per model class
    std::vector<double> decision_mass;  // summed |decision| of the pairs each class won
};

// Majority vote; ties go to the larger decision mass, then to class order.
Prediction predict_detailed(const SvmModel& model, std::span<const double> features);
Label predict(const SvmModel& model, std::span<const double> features);

struct EvalReport {
    std::array<std::array<std::size_t, kLabelCount>, kLabelCount> confusion{};  // [true][predicted]
    std::array<std::optional<double>, kLabelCount> per_label_accuracy{};        // unset for absent labels
    double overall_accuracy = 0.0;
    std::size_t unconverged_models = 0;

    std::size_t row_total(Label truth) const;
};

struct LoocvOptions {
    std::size_t jobs = 1;
    // Fits one standardizer on all rows before the folds. This leaks the
    // held-out row into the scaling and exists only to measure that leak.
    bool global_standardizer = false;
};

EvalReport loocv(const LabeledDataset& ds, const TrainParams& params = {}, const LoocvOptions& options = {});

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const SvmModel& model);
SvmModel model_from_json(const std::string& text);
void save_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_model(const std::filesystem::path& path);

}  // namespace moodtag
