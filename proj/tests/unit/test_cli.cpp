#include "cli.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run pcc_run(std::vector<std::string> args) {
    args.insert(args.begin(), "pcc");
    std::ostringstream out;
    std::ostringstream err;
    const int code = pcc::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

const fs::path kFixtures = PCC_TEST_DATA_DIR;

fs::path scratch(const char* name) {
    const auto dir = fs::temp_directory_path() / "pcc_cli_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("bound list and range") {
    const auto r = pcc_run({"bound", "--n-list", "4"});
    CHECK(r.code == 0);
    CHECK(r.out == "n,k_star,min_sum_d_sq,max_rho\n4,2,1,0.9\n");
    CHECK(r.err.find("0.875") != std::string::npos);

    const auto dir = scratch("bound");
    const auto csv = dir / "sweep.csv";
    CHECK(pcc_run({"bound", "--n-range", "2:1000000:log", "--out", csv.string()}).code == 0);
    const std::string text = read_all(csv);
    const auto last = text.substr(text.rfind('\n', text.size() - 2) + 1);
    CHECK(last.starts_with("1000000,500000,"));
    const double rho = std::stod(last.substr(last.rfind(',') + 1));
    CHECK(std::abs(rho - 0.875) < 1e-6);
}

TEST_CASE("bound usage errors") {
    CHECK(pcc_run({"bound", "--n-list", "1"}).code == 2);
    CHECK(pcc_run({"bound", "--n-list", "x"}).code == 2);
    CHECK(pcc_run({"bound"}).code == 2);
    CHECK(pcc_run({"bound", "--n-range", "10:2"}).code == 2);
    CHECK(pcc_run({}).code == 2);
    CHECK(pcc_run({"nonsense"}).code == 2);
}

TEST_CASE("filter reports before and after") {
    const auto dir = scratch("filter");
    const auto r = pcc_run({"filter", "--train", (kFixtures / "train_overlap.tsv").string(), "--test",
                            (kFixtures / "test_reversed.tsv").string(), "--out", (dir / "kept.tsv").string(),
                            "--removed-out", (dir / "removed.tsv").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("3 → 2") != std::string::npos);
    CHECK(read_all(dir / "removed.tsv") == "A cat sleeps.\tThe dog runs.\t0.4\n");

    const auto disjoint = pcc_run({"filter", "--train", (kFixtures / "three_pairs.tsv").string(), "--test",
                                   (kFixtures / "pairs.jsonl").string()});
    CHECK(disjoint.out.find("3 → 3") != std::string::npos);

    const auto bad = pcc_run({"filter", "--train", (kFixtures / "missing_score.tsv").string(), "--test",
                              (kFixtures / "three_pairs.tsv").string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("missing_score.tsv:2") != std::string::npos);
}

TEST_CASE("synth, train, eval round trip") {
    const auto dir = scratch("flow");
    const std::vector<std::string> small{"--set", "synth.num_items=300", "--set", "synth.num_pairs=1000",
                                         "--set", "stage1.epochs=1",     "--set", "stage2.epochs=1",
                                         "--set", "stage2.batch_size=50"};
    auto with = [&](std::vector<std::string> args) {
        args.insert(args.end(), small.begin(), small.end());
        return pcc_run(args);
    };
    const auto data = (dir / "data").string();
    REQUIRE(with({"synth", "--seed", "7", "--out", data}).code == 0);
    REQUIRE(with({"synth", "--seed", "7", "--out", (dir / "again").string()}).code == 0);
    for (const char* f : {"items.jsonl", "train.jsonl", "test.jsonl", "triplets.jsonl", "manifest.json"}) {
        CHECK(read_all(dir / "data" / f) == read_all(dir / "again" / f));
    }
    CHECK(fs::exists(dir / "data" / "effective_config.json"));

    REQUIRE(with({"train1", "--data", data, "--out", (dir / "t1").string()}).code == 0);
    CHECK(fs::exists(dir / "t1" / "checkpoint.bin"));
    CHECK(fs::exists(dir / "t1" / "train_log.jsonl"));
    CHECK(fs::exists(dir / "t1" / "effective_config.json"));

    CHECK(with({"train2", "--data", data, "--out", (dir / "t2").string()}).code == 2);
    CHECK(with({"train2", "--data", data, "--from-checkpoint", (dir / "missing.bin").string()}).code == 2);
    REQUIRE(with({"train2", "--data", data, "--from-checkpoint", (dir / "t1" / "checkpoint.bin").string(), "--out",
                  (dir / "t2").string()})
                .code == 0);

    const auto e = pcc_run({"eval", "--checkpoint", (dir / "t2" / "checkpoint.bin").string(), "--data", data,
                            "--timestamp", "fixed", "--out", (dir / "e").string()});
    CHECK(e.code == 0);
    const std::string report = read_all(dir / "e" / "eval_report.json");
    CHECK(report.find("\"per_dataset\"") != std::string::npos);
    CHECK(report.find("\"timestamp\": \"fixed\"") != std::string::npos);
}

TEST_CASE("eval without a checkpoint prints usage") {
    const auto r = pcc_run({"eval"});
    CHECK(r.code == 2);
    CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("numeric failure maps to exit code 3") {
    const auto dir = scratch("diverge");
    const auto data = (dir / "data").string();
    REQUIRE(pcc_run({"synth", "--out", data, "--set", "synth.num_items=300", "--set", "synth.num_pairs=1000"}).code == 0);
    const auto r = pcc_run({"train1", "--data", data, "--out", (dir / "t").string(), "--set",
                            "stage1.learning_rate=1e300", "--set", "stage1.epochs=2"});
    CHECK(r.code == 3);
}

TEST_CASE("help exits cleanly") {
    const auto r = pcc_run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("experiment") != std::string::npos);
}

}
