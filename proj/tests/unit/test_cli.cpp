#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "nodelab/cli.hpp"
#include "nodelab/graph_io.hpp"

using namespace nodelab;
namespace fs = std::filesystem;

namespace {

struct Run {
    int status;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int status = run_cli(args, out, err);
    return {status, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("nodelab-cli-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("solve prints the cost of K4 under DSATUR") {
    fs::path dir = scratch_dir("solve");
    write_graph_file(dir / "k4.col", fixtures::complete(4), GraphFormat::DimacsCol);
    Run r = run({"solve", "--problem", "gc", "--algorithm", "dsatur", "--input", (dir / "k4.col").string()});
    CHECK(r.status == 0);
    CHECK(r.out.find("cost 4\n") != std::string::npos);
    Run saved = run({"solve", "--input", (dir / "k4.col").string(), "--output", (dir / "out").string()});
    CHECK(saved.status == 0);
    CHECK(fs::exists(dir / "out" / "solution.json"));
}

TEST_CASE("oracle prints the optimum of C5 vertex cover") {
    fs::path dir = scratch_dir("oracle");
    write(dir / "c5.edgelist", "0 1\n1 2\n2 3\n3 4\n4 0\n");
    Run r = run({"oracle", "--problem", "mvc", "--input", (dir / "c5.edgelist").string()});
    CHECK(r.status == 0);
    auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.at("optimum") == 3);
}

TEST_CASE("exit codes") {
    CHECK(run({}).status == 1);
    CHECK(run({"frobnicate"}).status == 1);
    CHECK(run({"solve", "--no-such-flag"}).status == 1);
    CHECK(run({"--help"}).status == 0);
    CHECK(run({"solve", "--input", "/nonexistent/graph.col"}).status == 2);
    CHECK(run({"solve", "--problem", "tsp", "--input", "x"}).status == 1);

    fs::path dir = scratch_dir("exit");
    write(dir / "empty.json", R"({"dataset_glob": ")" + (dir / "*.col").string() + R"("})");
    Run empty = run({"evaluate", "--config", (dir / "empty.json").string()});
    CHECK(empty.status == 1);
    CHECK(empty.err.find("empty") != std::string::npos);
    write(dir / "broken.json", "{");
    CHECK(run({"evaluate", "--config", (dir / "broken.json").string()}).status == 1);
    CHECK(run({"evaluate"}).status == 1);
}

TEST_CASE("generate, train, evaluate and bench round trip") {
    fs::path dir = scratch_dir("flow");
    Run gen = run({"generate", "--family", "ws", "-n", "12", "--count", "3", "--seed", "4", "--output",
                   (dir / "data").string(), "--graph-format", "col"});
    REQUIRE(gen.status == 0);
    CHECK(fs::exists(dir / "data" / "ws-n12-2.col"));

    write(dir / "train.json", R"({"hyper": {"d": 8, "d_in": 8}, "epochs": 1, "batch_size": 4,
        "node_counts": [8, 10], "dataset_size": 8, "challenge_size": 4, "families": "gc"})");
    Run tr = run({"train", "--config", (dir / "train.json").string(), "--output", (dir / "run").string()});
    REQUIRE(tr.status == 0);
    CHECK(fs::exists(dir / "run" / "model.json"));
    std::ifstream log(dir / "run" / "train_log.jsonl");
    std::string line;
    REQUIRE(std::getline(log, line));
    CHECK(nlohmann::json::parse(line).at("epoch") == 1);

    nlohmann::json exp = {{"problem", "gc"},
                          {"dataset_glob", (dir / "data" / "*.col").string()},
                          {"algorithms", {"dsatur", "greedy:m", "sample:m"}},
                          {"checkpoints", {{"m", (dir / "run" / "model.json").string()}}},
                          {"samples", 4}};
    write(dir / "exp.json", exp.dump());
    Run ev = run({"evaluate", "--config", (dir / "exp.json").string(), "--output", (dir / "rep").string(),
                  "--format", "csv"});
    REQUIRE(ev.status == 0);
    CHECK(ev.out.find("greedy:m") != std::string::npos);
    std::ifstream csv(dir / "rep" / "report.csv");
    REQUIRE(std::getline(csv, line));
    CHECK(line == "# nodelab-report v1");

    Run sol = run({"solve", "--algorithm", "sample", "--checkpoint", (dir / "run" / "model.json").string(),
                   "--input", (dir / "data" / "ws-n12-0.col").string(), "--samples", "3"});
    CHECK(sol.status == 0);

    Run bench = run({"bench", "--d", "8", "--sizes", "50", "100", "--repeats", "1", "--output",
                     (dir / "bench").string()});
    CHECK(bench.status == 0);
    CHECK(bench.out.find("slope local") != std::string::npos);
    CHECK(fs::exists(dir / "bench" / "bench.json"));
}

}  // TEST_SUITE
