#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "moodtag/csv.hpp"
#include "moodtag/dataset.hpp"
#include "moodtag/error.hpp"
#include "moodtag/synthetic.hpp"

using namespace moodtag;

TEST_CASE("csv fields") {
    CHECK(csv::split("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(csv::split("\"x,y\",\"he said \"\"hi\"\"\",z") == std::vector<std::string>{"x,y", "he said \"hi\"", "z"});
    CHECK(csv::escape("plain") == "plain");
    CHECK(csv::escape("a,b") == "\"a,b\"");
    CHECK(csv::escape("q\"") == "\"q\"\"\"");
    CHECK(csv::split(csv::join({"a,b", "c"})) == std::vector<std::string>{"a,b", "c"});
    std::istringstream in("one\r\ntwo\n");
    std::string line;
    REQUIRE(csv::read_line(in, line));
    CHECK(line == "one");
    REQUIRE(csv::read_line(in, line));
    CHECK(line == "two");
    CHECK_FALSE(csv::read_line(in, line));
    CHECK(csv::format_number(0.1) == "0.1");
    CHECK(csv::format_number(1.0 / 3.0) == "0.333333333");
    CHECK(csv::format_number(INFINITY) == "inf");
}

TEST_CASE("labels") {
    CHECK(parse_label("Happy") == Label::Happy);
    CHECK(parse_label("THRILLER") == Label::Thriller);
    CHECK_FALSE(parse_label("angry"));
    CHECK(label_name(Label::Relaxing) == "relaxing");
    CHECK(label_title(Label::Epic) == "Epic");
}

TEST_CASE("feature csv round trip") {
    const auto ds = synthetic::gaussian_clusters(3, 2.0, 7);
    std::stringstream ss;
    write_feature_csv(ss, ds);
    const std::string text = ss.str();
    const auto header = text.substr(0, text.find('\n'));
    CHECK(std::count(header.begin(), header.end(), ',') == 88);
    CHECK(header.rfind("part_id,label,intensity_mean,", 0) == 0);

    const auto back = read_feature_csv(ss);
    REQUIRE(back.rows.size() == ds.rows.size());
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
        CHECK(back.rows[i].part_id == ds.rows[i].part_id);
        CHECK(back.rows[i].label == ds.rows[i].label);
        for (std::size_t f = 0; f < 87; ++f) {
            REQUIRE(std::abs(back.rows[i].features[f] - ds.rows[i].features[f]) <=
                    5e-9 * std::max(1.0, std::abs(ds.rows[i].features[f])));
        }
    }
    std::stringstream again;
    write_feature_csv(again, back);
    CHECK(again.str() == text);
}

TEST_CASE("feature json round trip") {
    auto ds = synthetic::gaussian_clusters(2, 2.0, 8);
    ds.rows[0].label.reset();
    testing::TempDir dir("json");
    write_feature_json(dir / "f.json", ds);
    const auto back = read_feature_json(dir / "f.json");
    REQUIRE(back.rows.size() == ds.rows.size());
    CHECK_FALSE(back.rows[0].label);
    for (std::size_t i = 0; i < ds.rows.size(); ++i) CHECK(back.rows[i].features == ds.rows[i].features);
}

TEST_CASE("schema checks") {
    const auto ds = synthetic::gaussian_clusters(1, 2.0, 9);
    std::stringstream ss;
    write_feature_csv(ss, ds);
    std::string text = ss.str();

    SUBCASE("permuted header") {
        const auto a = text.find("intensity_mean"), b = text.find("intensity_std");
        std::string swapped = text;
        swapped.replace(b, 13, "intensity_mean");
        swapped.replace(a, 14, "intensity_std");
        std::istringstream in(swapped);
        CHECK_THROWS_AS(read_feature_csv(in), SchemaError);
    }
    SUBCASE("missing column") {
        std::string cut = text;
        cut.erase(cut.find(",autocorr_lag13"), 15);
        std::istringstream in(cut);
        CHECK_THROWS_AS(read_feature_csv(in), SchemaError);
    }
    SUBCASE("unknown label") {
        std::string bad = text;
        const auto at = bad.find(",happy,");
        bad.replace(at, 7, ",angry,");
        std::istringstream in(bad);
        CHECK_THROWS_WITH_AS(read_feature_csv(in), doctest::Contains("angry"), SchemaError);
    }
    SUBCASE("other mfcc numbering is accepted") {
        FeatureConfig shifted;
        shifted.mfcc_first = 1;
        std::istringstream in(text);
        CHECK(read_feature_csv(in, shifted).rows.size() == 6);
    }
    SUBCASE("empty") {
        std::istringstream in("");
        CHECK_THROWS_AS(read_feature_csv(in), SchemaError);
    }
}

TEST_CASE("dataset validation") {
    auto ds = synthetic::gaussian_clusters(2, 2.0, 10);
    CHECK_NOTHROW(validate_labeled(ds));
    CHECK(label_counts(ds) == std::array<std::size_t, kLabelCount>{2, 2, 2, 2, 2, 2});
    auto dup = ds;
    dup.rows[1].part_id = dup.rows[0].part_id;
    CHECK_THROWS_AS(validate_labeled(dup), Error);
    auto nan = ds;
    nan.rows[0].features[4] = std::nan("");
    CHECK_THROWS_AS(validate_labeled(nan), Error);
    auto unlabeled = ds;
    unlabeled.rows[0].label.reset();
    CHECK_THROWS_AS(validate_labeled(unlabeled), Error);
}
