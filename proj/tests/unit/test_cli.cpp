#include <doctest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "moodtag/cli.hpp"
#include "moodtag/error.hpp"
#include "moodtag/synthetic.hpp"

using namespace moodtag;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "moodtag");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// Three short recordings at 44.1 kHz, written as 16-bit WAV.
void write_audio(const testing::TempDir& dir) {
    write_wav16(dir / "tone.wav", synthetic::tones({{262, 0.3}, {330, 0.2}, {392, 0.2}}, 16.0, 44100));
    write_wav16(dir / "noise.wav", synthetic::white_noise(15.5, 44100, 4));
    write_wav16(dir / "clicks.wav", synthetic::click_train(120.0, 15.2, 44100));
}

}  // namespace

TEST_CASE("config text") {
    cli::PipelineConfig c;
    cli::apply_config_text("# comment\n[features]\nn_frames = 100\nkernel = \"linear\"\nc = 2.5\njobs=3\n", c);
    CHECK(c.features.n_frames == 100);
    CHECK(c.train.kernel == KernelType::Linear);
    CHECK(c.train.c == 2.5);
    CHECK(c.jobs == 3);
    CHECK_THROWS_AS(cli::apply_config_text("colour = red\n", c), SchemaError);
    CHECK_THROWS_AS(cli::apply_config_text("c = lots\n", c), SchemaError);
}

TEST_CASE("manifest parsing") {
    testing::TempDir dir("manifest");
    spit(dir / "m.csv", "path,label,start\nsub/a.wav,Happy,\n/abs/b.wav,sad,2.5\n");
    const auto rows = cli::read_manifest(dir / "m.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].path == dir / "sub/a.wav");
    CHECK(rows[0].label == Label::Happy);
    CHECK(rows[0].part_id == "sub/a.wav");
    CHECK(rows[1].path == "/abs/b.wav");
    CHECK(rows[1].start_seconds == 2.5);
    CHECK(rows[1].part_id == "/abs/b.wav@2.5");

    spit(dir / "bad.csv", "path,label\nx.wav,grumpy\n");
    CHECK_THROWS_AS(cli::read_manifest(dir / "bad.csv"), SchemaError);
    CHECK_THROWS_AS(cli::read_manifest(dir / "none.csv"), SchemaError);
}

TEST_CASE("extract: three files, determinism and partial failure") {
    testing::TempDir dir("extract");
    write_audio(dir);
    spit(dir / "m.csv", "path,label,start\ntone.wav,happy,0.5\nnoise.wav,thriller,\nclicks.wav,exciting,0\n");

    const auto a = run({"extract", "--manifest", (dir / "m.csv").string(), "--out", (dir / "a.csv").string(),
                        "--jobs", "3"});
    CHECK(a.code == 0);
    const auto text = slurp(dir / "a.csv");
    CHECK(count_lines(text) == 4);
    const auto header = text.substr(0, text.find('\n'));
    CHECK(std::count(header.begin(), header.end(), ',') == 88);

    const auto b = run({"extract", "--manifest", (dir / "m.csv").string(), "--out", (dir / "b.csv").string()});
    CHECK(b.code == 0);
    CHECK(slurp(dir / "b.csv") == text);

    spit(dir / "m2.csv", "path,label\ntone.wav,happy\nmissing.wav,sad\nclicks.wav,epic\n");
    const auto c = run({"extract", "--manifest", (dir / "m2.csv").string(), "--out", (dir / "c.csv").string()});
    CHECK(c.code == 1);
    CHECK(count_lines(slurp(dir / "c.csv")) == 3);
    CHECK(c.err.find("missing.wav") != std::string::npos);

    const auto d = run({"extract", "--manifest", (dir / "nope.csv").string(), "--out", (dir / "d.csv").string()});
    CHECK(d.code == 2);

    const auto e = run({"extract", "--manifest", (dir / "m.csv").string(), "--out", (dir / "e.json").string(),
                        "--dump-spectrograms", (dir / "spec").string()});
    CHECK(e.code == 0);
    CHECK(read_feature_json(dir / "e.json").rows.size() == 3);
    CHECK(std::filesystem::exists(dir / "spec" / "spectrogram_0.csv"));
}

TEST_CASE("separability command") {
    testing::TempDir dir("sep");
    const auto ds = synthetic::gaussian_clusters(5, 4.0, 1);
    write_feature_csv(dir / "f.csv", ds);
    const auto ok = run({"separability", (dir / "f.csv").string(), "--out", (dir / "rep").string()});
    CHECK(ok.code == 0);
    CHECK(std::filesystem::exists(dir / "rep" / "separability.csv"));
    CHECK(ok.out.find("Maximum separability") != std::string::npos);

    LabeledDataset one = ds;
    std::erase_if(one.rows, [](const DatasetRow& r) { return r.label != Label::Sad; });
    write_feature_csv(dir / "one.csv", one);
    const auto single = run({"separability", (dir / "one.csv").string(), "--out", (dir / "rep1").string()});
    CHECK(single.code != 0);
    CHECK(single.err.find("need at least 2 labels") != std::string::npos);

    auto text = slurp(dir / "f.csv");
    const auto a = text.find("centroid_mean"), b = text.find("centroid_std");
    text.replace(b, 12, "centroid_mean");
    text.replace(a, 13, "centroid_std");
    spit(dir / "perm.csv", text);
    CHECK(run({"separability", (dir / "perm.csv").string(), "--out", (dir / "rep2").string()}).code == 2);
}

TEST_CASE("train, evaluate and predict on feature tables") {
    testing::TempDir dir("train");
    CHECK(run({"synth", "clusters", "--rows", "20", "--seed", "42", "--out", (dir / "c.csv").string()}).code == 0);
    const auto ev = run({"evaluate", (dir / "c.csv").string(), "--out", (dir / "eval").string(), "--jobs", "4"});
    CHECK(ev.code == 0);
    std::ifstream acc(dir / "eval" / "evaluation.csv");
    std::string line;
    std::getline(acc, line);
    CHECK(line == "label,accuracy,correct,count");
    for (int i = 0; i < 6; ++i) {
        REQUIRE(std::getline(acc, line));
        const double a = std::stod(line.substr(line.find(',') + 1));
        CHECK(a >= 0.95);
    }
    CHECK(std::filesystem::exists(dir / "eval" / "confusion.txt"));

    const auto tr = run({"train", (dir / "c.csv").string(), "--out", (dir / "m.json").string(), "--kernel", "linear",
                         "--c", "2"});
    CHECK(tr.code == 0);
    const auto model = load_model(dir / "m.json");
    CHECK(model.kernel.type == KernelType::Linear);
    CHECK(model.params.c == 2.0);

    const auto pr = run({"predict", "--model", (dir / "m.json").string(), (dir / "c.csv").string(), "--out",
                         (dir / "p.csv").string()});
    CHECK(pr.code == 0);
    const auto pred = slurp(dir / "p.csv");
    CHECK(pred.rfind("part_id,predicted_label\nhappy-0,happy\n", 0) == 0);
    CHECK(count_lines(pred) == 121);

    CHECK(run({"predict", "--model", (dir / "absent.json").string(), (dir / "c.csv").string()}).code == 2);
    CHECK(run({"train", (dir / "c.csv").string(), "--out", (dir / "x.json").string(), "--c", "-1"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"train", (dir / "missing.csv").string(), "--out", (dir / "y.json").string()}).code == 2);
}

TEST_CASE("flags override the config file") {
    testing::TempDir dir("config");
    CHECK(run({"synth", "clusters", "--rows", "4", "--out", (dir / "c.csv").string()}).code == 0);
    spit(dir / "run.toml", "kernel = \"linear\"\nc = 3\n");
    CHECK(run({"train", (dir / "c.csv").string(), "--out", (dir / "m.json").string(), "--config",
               (dir / "run.toml").string(), "--c", "0.5"})
              .code == 0);
    const auto model = load_model(dir / "m.json");
    CHECK(model.kernel.type == KernelType::Linear);
    CHECK(model.params.c == 0.5);
    spit(dir / "bad.toml", "bogus = 1\n");
    CHECK(run({"train", (dir / "c.csv").string(), "--out", (dir / "m2.json").string(), "--config",
               (dir / "bad.toml").string()})
              .code == 2);
}

TEST_CASE("predict on audio with a sine-versus-noise model") {
    testing::TempDir dir("audio");
    std::string manifest = "path,label\n";
    for (int i = 0; i < 4; ++i) {
        const std::string s = "sine" + std::to_string(i) + ".wav";
        const std::string n = "noise" + std::to_string(i) + ".wav";
        write_wav16(dir / s, synthetic::sine(300.0 + 90.0 * i, 15.0, 22050, 0.5));
        write_wav16(dir / n, synthetic::white_noise(15.0, 22050, 100 + i));
        manifest += s + ",relaxing\n" + n + ",thriller\n";
    }
    spit(dir / "m.csv", manifest);
    REQUIRE(run({"extract", "--manifest", (dir / "m.csv").string(), "--out", (dir / "f.csv").string(), "--jobs", "4"})
                .code == 0);
    REQUIRE(run({"train", (dir / "f.csv").string(), "--out", (dir / "m.json").string()}).code == 0);

    write_wav16(dir / "query_sine.wav", synthetic::sine(520.0, 15.0, 44100, 0.4));
    write_wav16(dir / "query_noise.wav", synthetic::white_noise(15.0, 44100, 999));
    const auto pr = run({"predict", "--model", (dir / "m.json").string(), (dir / "query_sine.wav").string(),
                         (dir / "query_noise.wav").string()});
    CHECK(pr.code == 0);
    CHECK(pr.out.find("query_sine.wav,relaxing") != std::string::npos);
    CHECK(pr.out.find("query_noise.wav,thriller") != std::string::npos);
}
