#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "helpers.hpp"
#include "moodtag/classifier.hpp"
#include "moodtag/error.hpp"
#include "moodtag/synthetic.hpp"

using namespace moodtag;

namespace {

using Rows = std::vector<std::vector<double>>;

double sum_alpha_y(const BinaryModel& m) {
    double s = 0.0;
    for (double c : m.coef) s += c;
    return s;
}

// Fresh draws from the same generator as gaussian_clusters.
LabeledDataset fresh_clusters(std::size_t rows, std::uint64_t seed) { return synthetic::gaussian_clusters(rows, 8.0, seed); }

SvmModel hand_model(const std::vector<double>& biases) {
    SvmModel m;
    m.classes = {Label::Happy, Label::Sad, Label::Epic};
    m.standardizer = Standardizer({0.0}, {1.0});
    m.kernel = Kernel{KernelType::Linear, 1.0};
    const std::pair<std::size_t, std::size_t> order[] = {{0, 1}, {0, 2}, {1, 2}};
    for (std::size_t i = 0; i < 3; ++i) {
        BinaryModel b;
        b.bias = biases[i];
        m.pairs.push_back({order[i].first, order[i].second, b});
    }
    return m;
}

}  // namespace

TEST_CASE("kernel names and parameter checks") {
    CHECK(parse_kernel("rbf") == KernelType::Rbf);
    CHECK(parse_kernel("linear") == KernelType::Linear);
    CHECK_FALSE(parse_kernel("poly"));
    TrainParams p;
    CHECK_NOTHROW(validate(p));
    p.c = 0.0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = {};
    p.gamma = -1.0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = {};
    p.tolerance = 0.0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("kernels") {
    const std::vector<double> a{1.0, 2.0}, b{3.0, -1.0};
    CHECK(Kernel{KernelType::Linear, 1.0}(a, b) == 1.0);
    CHECK(Kernel{KernelType::Rbf, 0.5}(a, b) == doctest::Approx(std::exp(-0.5 * 13.0)));
}

TEST_CASE("standardizer") {
    const auto s = Standardizer::fit({{1.0, 5.0}, {3.0, 5.0}});
    CHECK(s.mean() == std::vector<double>{2.0, 5.0});
    CHECK(s.scale()[0] == 1.0);
    CHECK(s.apply(std::vector<double>{1.0, 5.0}) == std::vector<double>{-1.0, 0.0});
    CHECK(s.apply(std::vector<double>{3.0, 9.0}) == std::vector<double>{1.0, 0.0});
    CHECK_THROWS_AS(Standardizer::fit({}), Error);
    CHECK_THROWS_AS(s.apply(std::vector<double>{1.0}), std::invalid_argument);

    std::mt19937_64 rng(2);
    Rows rows;
    for (int i = 0; i < 40; ++i) rows.push_back(testing::random_vector(5, rng, -50.0, 80.0));
    const auto fit = Standardizer::fit(rows);
    for (std::size_t f = 0; f < 5; ++f) {
        double mean = 0.0, sq = 0.0;
        for (const auto& r : rows) {
            const double z = fit.apply(r)[f];
            mean += z;
            sq += z * z;
        }
        CHECK(std::abs(mean / 40.0) < 1e-12);
        CHECK(sq / 40.0 == doctest::Approx(1.0));
    }
}

TEST_CASE("two points on a line") {
    const Kernel linear{KernelType::Linear, 1.0};
    const auto m = train_binary({{1.0}}, {{-1.0}}, linear, TrainParams{KernelType::Linear});
    CHECK(m.converged);
    CHECK(std::abs(m.decision(std::vector<double>{0.0}, linear)) < 1e-9);
    CHECK(m.decision(std::vector<double>{1.0}, linear) > 0.0);
    CHECK(m.decision(std::vector<double>{-1.0}, linear) < 0.0);
    CHECK_THROWS_AS(train_binary({}, {{1.0}}, linear, {}), Error);
}

TEST_CASE("separable points satisfy the KKT conditions") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    Rows pos, neg;
    while (pos.size() < 10 || neg.size() < 10) {
        const double x = u(rng), y = u(rng);
        const double margin = x + y;  // boundary x + y = 0
        if (margin > 1.5 && pos.size() < 10) pos.push_back({x, y});
        if (margin < -1.5 && neg.size() < 10) neg.push_back({x, y});
    }
    TrainParams p{KernelType::Linear, 10.0};
    const Kernel k{KernelType::Linear, 1.0};
    const auto m = train_binary(pos, neg, k, p);
    CHECK(m.converged);
    for (const auto& r : pos) CHECK(m.decision(r, k) > 0.0);
    for (const auto& r : neg) CHECK(m.decision(r, k) < 0.0);
    CHECK(max_kkt_violation(m, pos, neg, k, p.c) <= p.tolerance);
    CHECK(std::abs(sum_alpha_y(m)) < 1e-9);
    for (double a : m.alpha) CHECK((a >= 0.0 && a <= p.c));
}

TEST_CASE("xor with an rbf kernel") {
    const Rows pos{{1.0, 1.0}, {-1.0, -1.0}}, neg{{1.0, -1.0}, {-1.0, 1.0}};
    TrainParams p;
    p.gamma = 1.0;
    const Kernel k{KernelType::Rbf, 1.0};
    const auto m = train_binary(pos, neg, k, p);
    for (const auto& r : pos) CHECK(m.decision(r, k) > 0.0);
    for (const auto& r : neg) CHECK(m.decision(r, k) < 0.0);
    CHECK(max_kkt_violation(m, pos, neg, k, p.c) <= p.tolerance);
}

TEST_CASE("iteration bound reports non-convergence") {
    std::mt19937_64 rng(4);
    Rows a, b;
    for (int i = 0; i < 30; ++i) {
        a.push_back(testing::random_vector(3, rng));
        b.push_back(testing::random_vector(3, rng));
    }
    TrainParams p;
    p.gamma = 1.0;
    p.max_iterations = 2;
    const auto m = train_binary(a, b, Kernel{KernelType::Rbf, 1.0}, p);
    CHECK_FALSE(m.converged);
    CHECK(m.iterations == 2);
}

TEST_CASE("vote ties fall back to decision mass and then class order") {
    // Happy beats Sad (mass 1), Epic beats Happy (mass 2), Sad beats Epic (0.5).
    auto p = predict_detailed(hand_model({1.0, -2.0, 0.5}), std::vector<double>{0.0});
    CHECK(p.votes == std::vector<int>{1, 1, 1});
    CHECK(p.label == Label::Epic);
    p = predict_detailed(hand_model({1.0, -1.0, 1.0}), std::vector<double>{0.0});
    CHECK(p.votes == std::vector<int>{1, 1, 1});
    CHECK(p.label == Label::Happy);
    CHECK_THROWS_AS(predict(hand_model({1, 1, 1}), std::vector<double>{0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("symmetric two-class query is deterministic") {
    LabeledDataset ds;
    ds.schema = feature_schema();
    for (int i = 0; i < 4; ++i) {
        std::vector<double> a(87, 0.0), b(87, 0.0);
        a[0] = 1.0 + 0.1 * i;
        b[0] = -1.0 - 0.1 * i;
        ds.rows.push_back({"a" + std::to_string(i), Label::Happy, a});
        ds.rows.push_back({"b" + std::to_string(i), Label::Sad, b});
    }
    const auto model = train(ds, TrainParams{KernelType::Linear});
    const std::vector<double> mid(87, 0.0);
    const auto first = predict_detailed(model, mid);
    CHECK(std::abs(model.pairs[0].model.decision(model.standardizer.apply(mid), model.kernel)) < 1e-9);
    for (int i = 0; i < 5; ++i) CHECK(predict(model, mid) == first.label);
}

TEST_CASE("six clusters: training points and fresh samples") {
    const auto ds = synthetic::gaussian_clusters(20, 8.0, 42);
    const auto model = train(ds);
    CHECK(model.pairs.size() == 15);
    CHECK(model.converged());
    for (const auto& r : ds.rows) CHECK(predict(model, r.features) == *r.label);
    for (const auto& pair : model.pairs) {
        CHECK(std::abs(sum_alpha_y(pair.model)) < 1e-9);
        for (double a : pair.model.alpha) CHECK((a >= 0.0 && a <= model.params.c + 1e-12));
    }

    const auto fresh = fresh_clusters(100, 777);
    std::size_t right = 0;
    for (const auto& r : fresh.rows) right += predict(model, r.features) == *r.label;
    CHECK(static_cast<double>(right) / fresh.rows.size() >= 0.99);
}

TEST_CASE("default gamma") {
    const auto ds = synthetic::gaussian_clusters(5, 8.0, 1);
    const auto model = train(ds);
    // Standardized columns have unit variance unless constant.
    CHECK(*model.params.gamma == doctest::Approx(1.0 / 87.0));
    TrainParams fixed;
    fixed.gamma = 0.25;
    CHECK(train(ds, fixed).kernel.gamma == 0.25);
}

TEST_CASE("training is independent of row order") {
    auto ds = synthetic::gaussian_clusters(8, 3.0, 5);
    const auto a = train(ds);
    std::mt19937_64 rng(6);
    std::shuffle(ds.rows.begin(), ds.rows.end(), rng);
    const auto b = train(ds);
    CHECK(model_to_json(a) == model_to_json(b));
    const auto probe = synthetic::gaussian_clusters(10, 3.0, 99);
    for (const auto& r : probe.rows) CHECK(predict(a, r.features) == predict(b, r.features));
}

TEST_CASE("loocv on clusters and on noise") {
    const auto clusters = synthetic::gaussian_clusters(20, 8.0, 42);
    const auto report = loocv(clusters, {}, LoocvOptions{4});
    for (Label l : kAllLabels) {
        REQUIRE(report.per_label_accuracy[label_index(l)]);
        CHECK(*report.per_label_accuracy[label_index(l)] >= 0.95);
        CHECK(report.row_total(l) == 20);
    }
    const auto noise = synthetic::random_labels(120, 42);
    const auto nr = loocv(noise, {}, LoocvOptions{4});
    CHECK(nr.overall_accuracy >= 0.05);
    CHECK(nr.overall_accuracy <= 0.35);
    const auto counts = label_counts(noise);
    std::size_t diag = 0;
    for (Label l : kAllLabels) {
        CHECK(nr.row_total(l) == counts[label_index(l)]);
        diag += nr.confusion[label_index(l)][label_index(l)];
        if (counts[label_index(l)] > 0) {
            CHECK(*nr.per_label_accuracy[label_index(l)] ==
                  static_cast<double>(nr.confusion[label_index(l)][label_index(l)]) / counts[label_index(l)]);
        }
    }
    CHECK(nr.overall_accuracy == static_cast<double>(diag) / 120.0);
}

TEST_CASE("loocv is the same with any job count") {
    const auto ds = synthetic::random_labels(36, 8);
    const auto one = loocv(ds, {}, LoocvOptions{1});
    const auto many = loocv(ds, {}, LoocvOptions{6});
    CHECK(one.confusion == many.confusion);
}

TEST_CASE("loocv refits the standardizer per fold") {
    // Planted leak: per label, one row carries a large spike in a column that
    // is zero everywhere else. Held out, the spike column is constant in the
    // training rows only when scaling is fitted per fold.
    bool differs = false;
    for (std::uint64_t seed = 1; seed <= 10 && !differs; ++seed) {
        auto ds = synthetic::random_labels(24, seed);
        for (std::size_t i = 0; i < ds.rows.size(); ++i) ds.rows[i].label = i % 2 ? Label::Sad : Label::Happy;
        std::size_t col = 5;
        for (auto& r : ds.rows) {
            for (std::size_t c = 5; c < 30; ++c) r.features[c] = 0.0;
        }
        for (auto& r : ds.rows) {
            if (col < 30) r.features[col++] = 40.0;
        }
        const auto per_fold = loocv(ds);
        const auto leaky = loocv(ds, {}, LoocvOptions{1, true});

        // Direct re-computation: train() fits its own scaling on the rows it sees.
        std::array<std::array<std::size_t, kLabelCount>, kLabelCount> manual{};
        for (std::size_t i = 0; i < ds.rows.size(); ++i) {
            LabeledDataset fold{ds.schema, {}};
            for (std::size_t j = 0; j < ds.rows.size(); ++j) {
                if (j != i) fold.rows.push_back(ds.rows[j]);
            }
            const auto model = train(fold);
            ++manual[label_index(*ds.rows[i].label)][label_index(predict(model, ds.rows[i].features))];
        }
        REQUIRE(per_fold.confusion == manual);
        differs = per_fold.confusion != leaky.confusion;
    }
    CHECK(differs);
}

TEST_CASE("loocv preconditions") {
    auto ds = synthetic::gaussian_clusters(3, 8.0, 1);
    ds.rows.erase(ds.rows.begin() + 1, ds.rows.begin() + 3);  // one happy row left
    CHECK_THROWS_AS(loocv(ds), Error);
}

TEST_CASE("model round trip") {
    const auto ds = synthetic::gaussian_clusters(10, 4.0, 3);
    const auto model = train(ds);
    testing::TempDir dir("model");
    const auto path = dir / "model.json";
    save_model(model, path);
    const auto back = load_model(path);
    CHECK(back.classes == model.classes);
    CHECK(back.feature_names == model.feature_names);
    std::mt19937_64 rng(10);
    for (int i = 0; i < 1000; ++i) {
        const auto v = testing::random_vector(87, rng, -6.0, 6.0);
        const auto a = predict_detailed(model, v), b = predict_detailed(back, v);
        REQUIRE(a.label == b.label);
        REQUIRE(a.decision_mass == b.decision_mass);
    }
}

TEST_CASE("model loading errors") {
    const auto model = train(synthetic::gaussian_clusters(4, 4.0, 3));
    testing::TempDir dir("badmodel");

    auto doc = nlohmann::json::parse(model_to_json(model));
    doc["version"] = 7;
    CHECK_THROWS_WITH_AS(model_from_json(doc.dump()), doctest::Contains("unsupported model version 7"), Error);

    std::ofstream(dir / "empty.json").close();
    CHECK_THROWS_WITH_AS(load_model(dir / "empty.json"), doctest::Contains("empty"), Error);
    CHECK_THROWS_WITH_AS(model_from_json("{\"format\": \"moodtag-svm\", "), doctest::Contains("corrupt"), Error);
    CHECK_THROWS_AS(load_model(dir / "missing.json"), Error);
}
