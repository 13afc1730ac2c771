#include "fixtures.hpp"

#include <cli.hpp>

#include <metarec/ensemble.hpp>
#include <metarec/metafeatures.hpp>
#include <metarec/metatarget.hpp>
#include <metarec/synthetic.hpp>
#include <metarec/tabular.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace metarec;
using namespace metarec::testing;

namespace {

struct Result
{
    int code;
    std::string out;
    std::string err;
};

Result run_cli(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

void write_dataset(const std::filesystem::path& path, std::uint64_t seed)
{
    auto spec = random_spec(seed);
    spec.instances = 60;
    std::ostringstream text;
    write_csv(text, synthetic_problem(spec, seed, path.stem().string()));
    write_file(path, text.str());
}

// Feature and target tables of a fake corpus written into `dir`.
void write_meta_data(const TempDir& dir, std::size_t problems, std::uint64_t seed)
{
    const auto corpus = fake_meta_corpus(problems, 3, seed);
    std::ostringstream features, targets;
    write_feature_table(features, corpus.features);
    write_target_table(targets, corpus.targets);
    write_file(dir / "features.csv", features.str());
    write_file(dir / "targets.csv", targets.str());
}

} // namespace

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(run_cli({}).code, cli::exit_usage_error);
    EXPECT_EQ(run_cli({"bogus"}).code, cli::exit_usage_error);
    EXPECT_EQ(run_cli({"train", "--alpha"}).code, cli::exit_usage_error);
    EXPECT_EQ(run_cli({"--help"}).code, cli::exit_ok);
    TempDir dir("cli-usage");
    write_meta_data(dir, 20, 1);
    const auto f = (dir / "features.csv").string();
    const auto t = (dir / "targets.csv").string();
    const auto o = (dir / "bundle").string();
    EXPECT_EQ(run_cli({"train", "--features", f, "--targets", t, "--out", o, "--alpha", "1.5"}).code, cli::exit_usage_error);
    EXPECT_EQ(run_cli({"train", "--features", f, "--targets", t, "--out", o, "--mode", "best"}).code, cli::exit_usage_error);
    EXPECT_EQ(run_cli({"train", "--features", f, "--targets", t, "--out", o, "--threshold", "-1"}).code, cli::exit_usage_error);
    EXPECT_EQ(run_cli({"train", "--features", f, "--targets", t, "--out", o, "--mode", "every"}).code, cli::exit_usage_error);
    EXPECT_EQ(run_cli({"train", "--features", f, "--targets", t}).code, cli::exit_usage_error);
    EXPECT_FALSE(std::filesystem::exists(o));
}

TEST(Cli, ExtractReportsBadFiles)
{
    TempDir dir("cli-extract");
    const auto in = dir / "in";
    std::filesystem::create_directories(in);
    EXPECT_EQ(run_cli({"extract", in.string(), "--out", (dir / "f.csv").string()}).code, cli::exit_usage_error);
    EXPECT_EQ(run_cli({"extract", (dir / "missing").string(), "--out", (dir / "f.csv").string()}).code,
              cli::exit_usage_error);

    write_dataset(in / "a.csv", 1);
    write_dataset(in / "b.csv", 2);
    write_file(in / "broken.arff", "@relation x\n@attribute a numeric\n@data\n1\n");
    const auto r = run_cli({"extract", in.string(), "--out", (dir / "f.csv").string(), "--seed", "3"});
    EXPECT_EQ(r.code, cli::exit_data_error);
    EXPECT_NE(r.err.find("broken.arff"), std::string::npos);
    const auto table = load_feature_table(dir / "f.csv");
    ASSERT_EQ(table.size(), 2u);
    EXPECT_EQ(table[0].problem, "a");
    EXPECT_TRUE(std::filesystem::exists(dir / "f.imputed.csv"));

    std::filesystem::remove(in / "broken.arff");
    EXPECT_EQ(run_cli({"extract", in.string(), "--out", (dir / "g.csv").string(), "--seed", "3"}).code, cli::exit_ok);
    EXPECT_EQ(read_file(dir / "f.csv"), read_file(dir / "g.csv"));
}

TEST(Cli, TargetsFromAccuracyMatrices)
{
    TempDir dir("cli-targets");
    const auto in = dir / "acc";
    std::filesystem::create_directories(in);
    std::string dominated = "x,y,z\n";
    std::string tied = "x,y,z\n";
    for (int r = 0; r < 30; ++r)
    {
        const auto jitter = std::to_string(r % 7);
        dominated += "0.9" + jitter + ",0.8" + jitter + ",0.5" + jitter + "\n";
        tied += "0.7" + jitter + ",0.7" + std::to_string((r + 3) % 7) + ",0.7" + std::to_string((r + 5) % 7) + "\n";
    }
    write_file(in / "p1.csv", dominated);
    write_file(in / "p2.csv", tied);
    const auto out = dir / "targets.csv";
    const auto r = run_cli({"targets", in.string(), "--out", out.string()});
    EXPECT_EQ(r.code, cli::exit_ok) << r.err;
    const auto table = load_target_table(out);
    EXPECT_EQ(table.algorithms, (std::vector<std::string>{"x", "y", "z"}));
    EXPECT_EQ(table.problems, (std::vector<std::string>{"p1", "p2"}));
    EXPECT_EQ(table.targets[0].bits[2], 0);
    EXPECT_EQ(table.targets[1].bits, (std::vector<int>{1, 1, 1}));

    const auto two = dir / "two";
    std::filesystem::create_directories(two);
    write_file(two / "q.csv", "x,y\n0.9,0.5\n0.8,0.4\n0.85,0.45\n");
    const auto w = run_cli({"targets", two.string(), "--out", (dir / "t2.csv").string()});
    EXPECT_EQ(w.code, cli::exit_ok);
    EXPECT_NE(w.err.find("Wilcoxon"), std::string::npos);

    write_file(in / "p3.csv", "x,y\n0.5,0.5\n");
    EXPECT_EQ(run_cli({"targets", in.string(), "--out", out.string()}).code, cli::exit_data_error);
}

TEST(Cli, TargetsFromDatasets)
{
    TempDir dir("cli-targets-ds");
    const auto in = dir / "data";
    std::filesystem::create_directories(in);
    write_dataset(in / "d1.csv", 5);
    const auto r = run_cli({"targets", in.string(), "--from-datasets", "--repetitions", "1", "--folds", "3", "--out",
                            (dir / "t.csv").string(), "--accuracies-out", (dir / "acc").string()});
    EXPECT_EQ(r.code, cli::exit_ok) << r.err;
    const auto acc = load_accuracy_matrix(dir / "acc" / "d1.csv");
    EXPECT_EQ(acc.runs(), 3u);
    EXPECT_EQ(acc.algorithms(), demo_candidates().size());
}

TEST(Cli, TrainRecommendPipeline)
{
    TempDir dir("cli-pipeline");
    write_meta_data(dir, 40, 2);
    const auto bundle = (dir / "bundle").string();
    const auto t = run_cli({"train", "--features", (dir / "features.csv").string(), "--targets",
                            (dir / "targets.csv").string(), "--out", bundle, "--max-depth", "3"});
    ASSERT_EQ(t.code, cli::exit_ok) << t.err;
    EXPECT_NE(t.out.find("trained 31 x 3 models"), std::string::npos);

    write_dataset(dir / "new.csv", 9);
    const auto r = run_cli({"recommend", "--bundle", bundle, "--dataset", (dir / "new.csv").string()});
    ASSERT_EQ(r.code, cli::exit_ok) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "algorithm,probability,pick,rank");
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);

    // a zero threshold picks every algorithm
    const auto all = run_cli({"recommend", "--bundle", bundle, "--dataset", (dir / "new.csv").string(), "--threshold",
                              "0", "--out", (dir / "rec.csv").string()});
    ASSERT_EQ(all.code, cli::exit_ok) << all.err;
    const auto text = read_file(dir / "rec.csv");
    EXPECT_EQ(text.find(",0,"), std::string::npos);

    EXPECT_EQ(run_cli({"recommend", "--bundle", (dir / "nope").string(), "--dataset", (dir / "new.csv").string()}).code,
              cli::exit_data_error);
}

TEST(Cli, ConfigFileFillsUnsetOptions)
{
    TempDir dir("cli-config");
    write_meta_data(dir, 30, 3);
    write_file(dir / "good.json", "{\"features\": \"" + (dir / "features.csv").string() + "\", \"targets\": \"" +
                                      (dir / "targets.csv").string() + "\", \"mode\": \"bogus\", \"seed\": 4}");
    const auto r = run_cli({"train", "--config", (dir / "good.json").string(), "--mode", "diverse", "--out",
                            (dir / "b").string()});
    EXPECT_EQ(r.code, cli::exit_ok) << r.err;
    EXPECT_EQ(load_bundle(dir / "b").config.mode, FilterMode::diverse);
    EXPECT_EQ(load_bundle(dir / "b").config.seed, 4u);

    write_file(dir / "unknown.json", "{\"colour\": 1}");
    EXPECT_EQ(run_cli({"train", "--config", (dir / "unknown.json").string()}).code, cli::exit_usage_error);
    write_file(dir / "typed.json", "{\"alpha\": \"high\"}");
    EXPECT_EQ(run_cli({"train", "--config", (dir / "typed.json").string()}).code, cli::exit_usage_error);
    write_file(dir / "broken.json", "{");
    EXPECT_EQ(run_cli({"train", "--config", (dir / "broken.json").string()}).code, cli::exit_usage_error);
}

TEST(Cli, CrossValidationIsReproducible)
{
    TempDir dir("cli-xval");
    write_meta_data(dir, 30, 4);
    const std::vector<std::string> base{"xval", "--features", (dir / "features.csv").string(), "--targets",
                                        (dir / "targets.csv").string(), "--repetitions", "1", "--folds", "3",
                                        "--mode", "every", "--out"};
    auto first = base;
    first.push_back((dir / "a").string());
    auto second = base;
    second.push_back((dir / "b").string());
    second.insert(second.end(), {"--threads", "2"});
    const auto a = run_cli(first);
    ASSERT_EQ(a.code, cli::exit_ok) << a.err;
    EXPECT_NE(a.out.find("En:accurate-and-diverse: ranking loss"), std::string::npos);
    ASSERT_EQ(run_cli(second).code, cli::exit_ok);
    EXPECT_EQ(read_file(dir / "a" / "report.json"), read_file(dir / "b" / "report.json"));
    EXPECT_EQ(read_file(dir / "a" / "ranking_loss.csv"), read_file(dir / "b" / "ranking_loss.csv"));

    TempDir small("cli-xval-small");
    write_meta_data(small, 10, 5);
    EXPECT_EQ(run_cli({"xval", "--features", (small / "features.csv").string(), "--targets",
                       (small / "targets.csv").string(), "--out", (small / "r").string()})
                  .code,
              cli::exit_data_error);
}

TEST(Cli, Datasetoids)
{
    TempDir dir("cli-datasetoids");
    const TabularDataset d("toy", {nom("colour", {"red", "blue"}), num("x")}, binary_class(),
                           {0, 1.0, 1, 2.0, 0, 3.0, 1, 4.0}, {0, 1, 0, 1});
    std::ostringstream text;
    write_csv(text, d);
    write_file(dir / "toy.csv", text.str());
    const auto r = run_cli({"datasetoids", (dir / "toy.csv").string(), "--out", (dir / "out").string()});
    ASSERT_EQ(r.code, cli::exit_ok) << r.err;
    EXPECT_NE(r.out.find("wrote 1 datasetoid"), std::string::npos);
}
