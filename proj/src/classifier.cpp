#include "moodtag/classifier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "moodtag/error.hpp"
#include "moodtag/stats.hpp"

namespace moodtag {

namespace {

using Rows = std::vector<std::vector<double>>;

constexpr double kTau = 1e-12;

Rows sorted_rows(const Rows& rows) {
    Rows out = rows;
    std::sort(out.begin(), out.end());
    return out;
}

double resolve_gamma(const TrainParams& params, const Rows& standardized) {
    if (params.gamma) return *params.gamma;
    const std::size_t d = standardized.empty() ? 0 : standardized.front().size();
    if (d == 0) return 1.0;
    double total_var = 0.0;
    for (std::size_t f = 0; f < d; ++f) {
        std::vector<double> column;
        column.reserve(standardized.size());
        for (const auto& r : standardized) column.push_back(r[f]);
        const auto s = mean_std(column);
        total_var += s.std * s.std;
    }
    const double mean_var = total_var / static_cast<double>(d);
    return mean_var > 0.0 ? 1.0 / (static_cast<double>(d) * mean_var) : 1.0 / static_cast<double>(d);
}

struct Split {
    std::vector<Label> classes;
    std::vector<Rows> rows;  // per class, already standardized
};

SvmModel train_on(const Split& split, const Standardizer& standardizer, const TrainParams& params,
                  std::vector<std::string> feature_names) {
    if (split.classes.size() < 2) {
        throw Error("training needs at least 2 labels");
    }
    SvmModel model;
    model.classes = split.classes;
    model.feature_names = std::move(feature_names);
    model.standardizer = standardizer;
    model.params = params;

    Rows all;
    for (const auto& r : split.rows) all.insert(all.end(), r.begin(), r.end());
    model.params.gamma = resolve_gamma(params, all);
    model.kernel = Kernel{params.kernel, *model.params.gamma};

    for (std::size_t a = 0; a < split.classes.size(); ++a) {
        for (std::size_t b = a + 1; b < split.classes.size(); ++b) {
            model.pairs.push_back({a, b, train_binary(split.rows[a], split.rows[b], model.kernel, model.params)});
        }
    }
    return model;
}

// Rows grouped by label in canonical label order; each group sorted.
Split group_rows(const std::vector<const DatasetRow*>& rows) {
    Split split;
    for (Label label : kAllLabels) {
        Rows group;
        for (const auto* r : rows) {
            if (r->label == label) group.push_back(r->features);
        }
        if (group.empty()) continue;
        split.classes.push_back(label);
        split.rows.push_back(sorted_rows(group));
    }
    return split;
}

Standardizer fit_on(const Split& split) {
    Rows all;
    for (const auto& r : split.rows) all.insert(all.end(), r.begin(), r.end());
    return Standardizer::fit(all);
}

void standardize_in_place(Split& split, const Standardizer& standardizer) {
    for (auto& group : split.rows) {
        for (auto& r : group) r = standardizer.apply(r);
    }
}

}  // namespace

std::string_view kernel_name(KernelType kernel) { return kernel == KernelType::Linear ? "linear" : "rbf"; }

std::optional<KernelType> parse_kernel(std::string_view name) {
    if (name == "linear") return KernelType::Linear;
    if (name == "rbf") return KernelType::Rbf;
    return std::nullopt;
}

void validate(const TrainParams& params) {
    if (!(params.c > 0.0)) throw std::invalid_argument("C must be positive");
    if (params.gamma && !(*params.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (!(params.tolerance > 0.0)) throw std::invalid_argument("SMO tolerance must be positive");
    if (params.max_iterations == 0) throw std::invalid_argument("iteration bound must be positive");
}

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const {
    if (type == KernelType::Linear) {
        double dot = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
        return dot;
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> scale)
    : mean_(std::move(mean)), scale_(std::move(scale)) {
    if (mean_.size() != scale_.size()) {
        throw std::invalid_argument("Standardizer: mean and scale lengths differ");
    }
}

Standardizer Standardizer::fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) {
        throw Error("standardizer: no rows to fit");
    }
    const std::size_t d = rows.front().size();
    std::vector<double> mean(d), scale(d);
    std::vector<double> column(rows.size());
    for (std::size_t f = 0; f < d; ++f) {
        for (std::size_t i = 0; i < rows.size(); ++i) column[i] = rows[i].at(f);
        const auto s = mean_std(column);
        mean[f] = s.mean;
        scale[f] = std::max(s.std, kStdFloor);
    }
    return Standardizer(std::move(mean), std::move(scale));
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
    if (row.size() != mean_.size()) {
        throw std::invalid_argument("standardizer: expected " + std::to_string(mean_.size()) + " features, got " +
                                    std::to_string(row.size()));
    }
    std::vector<double> out(row.size());
    for (std::size_t f = 0; f < row.size(); ++f) {
        out[f] = scale_[f] <= kStdFloor ? 0.0 : (row[f] - mean_[f]) / scale_[f];
    }
    return out;
}

double BinaryModel::decision(std::span<const double> x, const Kernel& kernel) const {
    double s = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i) s += coef[i] * kernel(support_vectors[i], x);
    return s;
}

BinaryModel train_binary(const Rows& first_class, const Rows& second_class, const Kernel& kernel,
                         const TrainParams& params) {
    if (first_class.empty() || second_class.empty()) {
        throw Error("binary SVM: both classes need at least one row");
    }
    validate(params);
    Rows x = sorted_rows(first_class);
    const std::size_t n_first = x.size();
    for (auto& r : sorted_rows(second_class)) x.push_back(std::move(r));
    const std::size_t n = x.size();
    std::vector<double> y(n, -1.0);
    std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_first), 1.0);
    const double c = params.c;

    // Q_ij = y_i y_j K(x_i, x_j)
    std::vector<double> q(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = y[i] * y[j] * kernel(x[i], x[j]);
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < c : alpha[t] > 0.0; };
    auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < c; };

    BinaryModel model;
    model.converged = false;
    std::size_t iter = 0;
    for (; iter < params.max_iterations; ++iter) {
        double g_max = -std::numeric_limits<double>::infinity();
        double g_min = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t) && v > g_max) {
                g_max = v;
                i = t;
            }
            if (in_low(t) && v < g_min) {
                g_min = v;
                j = t;
            }
        }
        if (i == n || j == n || g_max - g_min < params.tolerance) {
            model.converged = true;
            break;
        }

        const double* qi = &q[i * n];
        const double* qj = &q[j * n];
        const double old_i = alpha[i];
        const double old_j = alpha[j];
        if (y[i] != y[j]) {
            double quad = qi[i] + qj[j] + 2.0 * qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = qi[i] + qj[j] - 2.0 * qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        const double d_i = alpha[i] - old_i;
        const double d_j = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) grad[t] += qi[t] * d_i + qj[t] * d_j;
    }
    model.iterations = iter;

    // Bias from free vectors, or the midpoint of the feasible interval.
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= c) {
            if (y[t] < 0) upper = std::min(upper, yg);
            else lower = std::max(lower, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] > 0) upper = std::min(upper, yg);
            else lower = std::max(lower, yg);
        } else {
            free_sum += yg;
            ++free_count;
        }
    }
    const double rho = free_count ? free_sum / static_cast<double>(free_count) : (upper + lower) / 2.0;
    model.bias = -rho;

    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] <= 0.0) continue;
        model.support_vectors.push_back(x[t]);
        model.alpha.push_back(alpha[t]);
        model.coef.push_back(alpha[t] * y[t]);
    }
    return model;
}

double max_kkt_violation(const BinaryModel& model, const Rows& first_class, const Rows& second_class,
                         const Kernel& kernel, double c) {
    double worst = 0.0;
    auto check = [&](const Rows& rows, double y) {
        for (const auto& r : rows) {
            double a = 0.0;
            for (std::size_t s = 0; s < model.support_vectors.size(); ++s) {
                if (model.support_vectors[s] == r && (model.coef[s] > 0) == (y > 0)) {
                    a = model.alpha[s];
                    break;
                }
            }
            const double margin = y * model.decision(r, kernel) - 1.0;
            double v = 0.0;
            if (a <= 0.0) {
                v = std::max(0.0, -margin);
            } else if (a >= c) {
                v = std::max(0.0, margin);
            } else {
                v = std::abs(margin);
            }
            worst = std::max(worst, v);
        }
    };
    check(first_class, 1.0);
    check(second_class, -1.0);
    return worst;
}

bool SvmModel::converged() const {
    return std::all_of(pairs.begin(), pairs.end(), [](const PairModel& p) { return p.model.converged; });
}

SvmModel train(const LabeledDataset& ds, const TrainParams& params) {
    validate(params);
    validate_labeled(ds);
    std::vector<const DatasetRow*> rows;
    for (const auto& r : ds.rows) rows.push_back(&r);
    Split split = group_rows(rows);
    const Standardizer standardizer = fit_on(split);
    standardize_in_place(split, standardizer);
    return train_on(split, standardizer, params, ds.schema ? ds.schema->names() : std::vector<std::string>{});
}

Prediction predict_detailed(const SvmModel& model, std::span<const double> features) {
    if (features.size() != model.dimension()) {
        throw std::invalid_argument("predict: expected " + std::to_string(model.dimension()) + " features, got " +
                                    std::to_string(features.size()));
    }
    const auto z = model.standardizer.apply(features);
    const std::size_t k = model.classes.size();
    Prediction p{model.classes.front(), std::vector<int>(k, 0), std::vector<double>(k, 0.0)};
    for (const auto& pair : model.pairs) {
        const double d = pair.model.decision(z, model.kernel);
        const std::size_t winner = d > 0.0 ? pair.first : pair.second;
        ++p.votes[winner];
        p.decision_mass[winner] += std::abs(d);
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
        if (p.votes[c] > p.votes[best] || (p.votes[c] == p.votes[best] && p.decision_mass[c] > p.decision_mass[best])) {
            best = c;
        }
    }
    p.label = model.classes[best];
    return p;
}

Label predict(const SvmModel& model, std::span<const double> features) {
    return predict_detailed(model, features).label;
}

std::size_t EvalReport::row_total(Label truth) const {
    const auto& row = confusion[label_index(truth)];
    return std::accumulate(row.begin(), row.end(), std::size_t{0});
}

EvalReport loocv(const LabeledDataset& ds, const TrainParams& params, const LoocvOptions& options) {
    validate(params);
    validate_labeled(ds);
    const auto counts = label_counts(ds);
    std::size_t present = 0;
    for (Label label : kAllLabels) {
        const std::size_t count = counts[label_index(label)];
        if (count == 0) continue;
        ++present;
        if (count < 2) {
            throw Error("label " + std::string(label_name(label)) +
                        " has fewer than 2 samples; its held-out fold would have no training rows");
        }
    }
    if (present < 2) throw Error("need at least 2 labels");

    std::optional<Standardizer> global;
    if (options.global_standardizer) {
        Rows all;
        for (const auto& r : ds.rows) all.push_back(r.features);
        global = Standardizer::fit(all);
    }
    const auto names = ds.schema ? ds.schema->names() : std::vector<std::string>{};

    const std::size_t n = ds.rows.size();
    std::vector<Label> predicted(n, Label::Happy);
    std::vector<char> unconverged(n, 0);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t fold = next++; fold < n; fold = next++) {
            std::vector<const DatasetRow*> train_rows;
            train_rows.reserve(n - 1);
            for (std::size_t i = 0; i < n; ++i) {
                if (i != fold) train_rows.push_back(&ds.rows[i]);
            }
            Split split = group_rows(train_rows);
            const Standardizer standardizer = global ? *global : fit_on(split);
            standardize_in_place(split, standardizer);
            const SvmModel model = train_on(split, standardizer, params, names);
            unconverged[fold] = model.converged() ? 0 : 1;
            predicted[fold] = predict(model, ds.rows[fold].features);
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, n));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    EvalReport report;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Label truth = *ds.rows[i].label;
        ++report.confusion[label_index(truth)][label_index(predicted[i])];
        if (truth == predicted[i]) ++correct;
        report.unconverged_models += static_cast<std::size_t>(unconverged[i]);
    }
    for (Label label : kAllLabels) {
        const std::size_t total = report.row_total(label);
        if (total == 0) continue;
        report.per_label_accuracy[label_index(label)] =
            static_cast<double>(report.confusion[label_index(label)][label_index(label)]) / static_cast<double>(total);
    }
    report.overall_accuracy = n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
    return report;
}

std::string model_to_json(const SvmModel& model) {
    nlohmann::json doc;
    doc["format"] = "moodtag-svm";
    doc["version"] = kModelFormatVersion;
    doc["kernel"] = std::string(kernel_name(model.kernel.type));
    doc["c"] = model.params.c;
    doc["gamma"] = model.kernel.gamma;
    doc["tolerance"] = model.params.tolerance;
    doc["max_iterations"] = model.params.max_iterations;
    nlohmann::json classes = nlohmann::json::array();
    for (Label l : model.classes) classes.push_back(std::string(label_name(l)));
    doc["classes"] = classes;
    doc["features"] = model.feature_names;
    doc["standardizer"] = {{"mean", model.standardizer.mean()}, {"scale", model.standardizer.scale()}};
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : model.pairs) {
        pairs.push_back({{"first", p.first},
                         {"second", p.second},
                         {"bias", p.model.bias},
                         {"converged", p.model.converged},
                         {"iterations", p.model.iterations},
                         {"alpha", p.model.alpha},
                         {"coef", p.model.coef},
                         {"support_vectors", p.model.support_vectors}});
    }
    doc["pairs"] = pairs;
    return doc.dump(1);
}

SvmModel model_from_json(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error("model file is empty");
    }
    try {
        const auto doc = nlohmann::json::parse(text);
        if (doc.at("format").get<std::string>() != "moodtag-svm") {
            throw Error("not a moodtag model file");
        }
        const int version = doc.at("version").get<int>();
        if (version != kModelFormatVersion) {
            throw Error("unsupported model version " + std::to_string(version) + " (expected " +
                        std::to_string(kModelFormatVersion) + ")");
        }
        SvmModel model;
        const auto kernel = parse_kernel(doc.at("kernel").get<std::string>());
        if (!kernel) throw Error("unknown kernel in model file");
        model.params.kernel = *kernel;
        model.params.c = doc.at("c").get<double>();
        model.params.gamma = doc.at("gamma").get<double>();
        model.params.tolerance = doc.at("tolerance").get<double>();
        model.params.max_iterations = doc.at("max_iterations").get<std::size_t>();
        validate(model.params);
        model.kernel = Kernel{*kernel, *model.params.gamma};
        for (const auto& name : doc.at("classes")) {
            const auto label = parse_label(name.get<std::string>());
            if (!label) throw Error("unknown class in model file");
            model.classes.push_back(*label);
        }
        if (model.classes.size() < 2) throw Error("model file lists fewer than 2 classes");
        model.feature_names = doc.at("features").get<std::vector<std::string>>();
        model.standardizer = Standardizer(doc.at("standardizer").at("mean").get<std::vector<double>>(),
                                          doc.at("standardizer").at("scale").get<std::vector<double>>());
        const std::size_t d = model.standardizer.dimension();
        for (const auto& p : doc.at("pairs")) {
            PairModel pair;
            pair.first = p.at("first").get<std::size_t>();
            pair.second = p.at("second").get<std::size_t>();
            if (pair.first >= model.classes.size() || pair.second >= model.classes.size()) {
                throw Error("model file: pair refers to an unknown class");
            }
            pair.model.bias = p.at("bias").get<double>();
            pair.model.converged = p.at("converged").get<bool>();
            pair.model.iterations = p.at("iterations").get<std::size_t>();
            pair.model.alpha = p.at("alpha").get<std::vector<double>>();
            pair.model.coef = p.at("coef").get<std::vector<double>>();
            pair.model.support_vectors = p.at("support_vectors").get<Rows>();
            if (pair.model.alpha.size() != pair.model.coef.size() ||
                pair.model.coef.size() != pair.model.support_vectors.size()) {
                throw Error("model file: support vector arrays disagree in length");
            }
            for (const auto& sv : pair.model.support_vectors) {
                if (sv.size() != d) throw Error("model file: support vector has the wrong dimension");
            }
            model.pairs.push_back(std::move(pair));
        }
        const std::size_t k = model.classes.size();
        if (model.pairs.size() != k * (k - 1) / 2) throw Error("model file: wrong number of pairwise models");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("corrupt model file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw Error(std::string("corrupt model file: ") + e.what());
    }
}

void save_model(const SvmModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << model_to_json(model) << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

SvmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return model_from_json(ss.str());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

}  // namespace moodtag
