#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "testutil.hpp"

using namespace mediaprof::test;
using nlohmann::json;

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string output; // stdout + stderr
};

CmdResult run_cli(const std::string& args) {
    const std::string cmd = std::string(MEDIAPROF_CLI_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CmdResult result;
    std::array<char, 4096> buf;
    while (std::fgets(buf.data(), buf.size(), pipe)) result.output += buf.data();
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

} // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("ablate").exit_code == 2); // missing required --plan

    TempDir dir;
    const auto config = make_demo_project(dir.path(), 6);
    const std::string base = "--config " + config.string();
    auto unknown_source = run_cli(base + " ingest --sources articles,telegraph");
    CHECK(unknown_source.exit_code == 2);
    CHECK(unknown_source.output.find("unknown source") != std::string::npos);
    auto unknown_task = run_cli(base + " featurize --task vibe");
    CHECK(unknown_task.exit_code == 2);
}

TEST_CASE("missing config exits with a runtime error") {
    auto result = run_cli("--config /nonexistent.json ingest");
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("config") != std::string::npos);
}

TEST_CASE("ingest, featurize, train, evaluate, predict round trip") {
    TempDir dir;
    const auto config = make_demo_project(dir.path(), 24);
    const std::string base = "--config " + config.string();

    auto ingest = run_cli(base + " ingest");
    CHECK(ingest.exit_code == 0);
    CHECK(ingest.output.find("\"coverage_pct\": 100.0") != std::string::npos);

    auto featurize = run_cli(base + " featurize --task both");
    CHECK(featurize.exit_code == 0);
    CHECK(featurize.output.find("\"task\": \"factuality\"") != std::string::npos);

    const std::string model = (dir / "bias.model.json").string();
    auto train = run_cli(base + " train --task bias --features articles.enc --folds 4 --out " + model);
    CHECK(train.exit_code == 0);
    CHECK(std::filesystem::exists(model));

    auto evaluate = run_cli(base + " evaluate --task bias --features articles.enc,wiki.enc --folds 4");
    CHECK(evaluate.exit_code == 0);
    CHECK(evaluate.output.find("macro_f1") != std::string::npos);

    auto predict = run_cli(base + " predict --medium m101 --model-bias " + model);
    CHECK(predict.exit_code == 0);
    const auto pos = predict.output.find('{');
    REQUIRE(pos != std::string::npos);
    const json pred = json::parse(predict.output.substr(pos));
    CHECK(pred["tasks"]["bias"]["posterior"].size() == 3);

    auto no_model = run_cli(base + " predict --medium m101");
    CHECK(no_model.exit_code == 2);

    // fold error surfaces verbatim: 24 labeled media cannot make 30 folds
    auto fold_error = run_cli(base + " train --task bias --features articles.enc --folds 30");
    CHECK(fold_error.exit_code == 1);
    CHECK(fold_error.output.find("fewer than k") != std::string::npos);
}

TEST_CASE("ablate runs are byte-identical for a fixed seed") {
    TempDir dir;
    const auto config = make_demo_project(dir.path(), 18);
    const std::string base = "--config " + config.string();
    REQUIRE(run_cli(base + " ingest").exit_code == 0);
    REQUIRE(run_cli(base + " featurize --task bias").exit_code == 0);

    json plan{{"name", "cli-smoke"},
              {"task", "bias"},
              {"folds", 3},
              {"grid", {{"c", {10.0}}, {"gamma", {0.001}}}},
              {"rows",
               json::array({{{"id", "s1"},
                             {"group", "A"},
                             {"label", "articles encoder"},
                             {"features", json::array({"articles.enc"})},
                             {"mode", "single"}},
                            {{"id", "e1"},
                             {"group", "X"},
                             {"label", "articles + wikipedia (en)"},
                             {"features", json::array({"articles.enc", "wiki.enc"})},
                             {"mode", "ensemble"}}})}};
    write_file(dir / "plan.json", plan.dump());

    const std::string plan_arg = " ablate --plan " + (dir / "plan.json").string();
    auto first = run_cli(base + " --seed 21" + plan_arg + " --out " + (dir / "out1").string());
    CHECK(first.exit_code == 0);
    auto second = run_cli(base + " --seed 21" + plan_arg + " --out " + (dir / "out2").string());
    CHECK(second.exit_code == 0);

    const std::string r1 = read_file(dir / "out1" / "report.json");
    const std::string r2 = read_file(dir / "out2" / "report.json");
    CHECK(r1 == r2);
    CHECK(!r1.empty());

    // markdown rendering through --format
    auto md = run_cli(base + plan_arg + " --format markdown --out " + (dir / "out3").string());
    CHECK(md.exit_code == 0);
    CHECK(md.output.find("| Group | # | Features | Dim. | Macro F1 | Accuracy |") !=
          std::string::npos);

    // a different seed changes the fold split, so reports differ
    auto third = run_cli(base + " --seed 22" + plan_arg + " --out " + (dir / "out4").string());
    CHECK(third.exit_code == 0);
    CHECK(read_file(dir / "out4" / "report.json") != r1);
}
