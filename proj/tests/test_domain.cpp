#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mediaprof/domain.hpp"
#include "testutil.hpp"

using namespace mediaprof;
using namespace mediaprof::test;

TEST_CASE("normalize_bias folds the seven-point scale to three") {
    CHECK(normalize_bias(RawBiasLabel::ExtremeLeft) == BiasLabel::Left);
    CHECK(normalize_bias(RawBiasLabel::Left) == BiasLabel::Left);
    CHECK(normalize_bias(RawBiasLabel::Center) == BiasLabel::Center);
    CHECK(normalize_bias(RawBiasLabel::Right) == BiasLabel::Right);
    CHECK(normalize_bias(RawBiasLabel::ExtremeRight) == BiasLabel::Right);
    CHECK_FALSE(normalize_bias(RawBiasLabel::CenterLeft).has_value());
    CHECK_FALSE(normalize_bias(RawBiasLabel::CenterRight).has_value());
}

TEST_CASE("normalize_bias covers all three outputs and is code-stable") {
    bool seen[3] = {false, false, false};
    bool seen_absent = false;
    for (int raw = 0; raw <= 6; ++raw) {
        auto out = normalize_bias(static_cast<RawBiasLabel>(raw));
        if (!out) {
            seen_absent = true;
            continue;
        }
        seen[static_cast<int>(*out)] = true;
        // stable codes survive an int round trip
        CHECK(static_cast<BiasLabel>(static_cast<int>(*out)) == *out);
    }
    CHECK(seen[0]);
    CHECK(seen[1]);
    CHECK(seen[2]);
    CHECK(seen_absent);
    CHECK(static_cast<int>(BiasLabel::Left) == 0);
    CHECK(static_cast<int>(BiasLabel::Center) == 1);
    CHECK(static_cast<int>(BiasLabel::Right) == 2);
    CHECK(static_cast<int>(FactualityLabel::Low) == 0);
    CHECK(static_cast<int>(FactualityLabel::Mixed) == 1);
    CHECK(static_cast<int>(FactualityLabel::High) == 2);
}

TEST_CASE("empty snapshot loads as empty dataset") {
    TempDir dir;
    write_file(dir / "empty.jsonl", "");
    Dataset ds = load_dataset(dir / "empty.jsonl");
    CHECK(ds.size() == 0);
    auto counts = label_counts(ds, Task::Bias);
    CHECK(counts[0] == 0);
    CHECK(counts[1] == 0);
    CHECK(counts[2] == 0);
}

TEST_CASE("duplicate medium_id is rejected") {
    TempDir dir;
    write_file(dir / "dup.jsonl",
               R"({"medium_id":"a","domain_url":"https://a"})"
               "\n"
               R"({"medium_id":"a","domain_url":"https://a2"})"
               "\n");
    CHECK_THROWS_AS(load_dataset(dir / "dup.jsonl"), ValidationError);
}

TEST_CASE("unknown labels and malformed lines carry line numbers") {
    TempDir dir;
    write_file(dir / "bad.jsonl",
               R"({"medium_id":"a","domain_url":"https://a"})"
               "\n"
               R"({"medium_id":"b","domain_url":"https://b","raw_bias":"ultra-left"})"
               "\n");
    try {
        load_dataset(dir / "bad.jsonl");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("ultra-left") != std::string::npos);
    }

    write_file(dir / "garbage.jsonl", "{not json\n");
    try {
        load_dataset(dir / "garbage.jsonl");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
    }

    write_file(dir / "nokey.jsonl", R"({"domain_url":"https://a"})" "\n{}\n");
    // a single object without medium_id is the provenance header, but a second
    // record line without it is an error
    CHECK_THROWS_AS(load_dataset(dir / "nokey.jsonl"), ParseError);
}

TEST_CASE("table-1 snapshot reproduces the reference label counts") {
    Dataset ds = table1_dataset();
    CHECK(ds.size() == 864);
    auto bias = label_counts(ds, Task::Bias);
    CHECK(bias[0] == 243);
    CHECK(bias[1] == 272);
    CHECK(bias[2] == 349);
    auto fact = label_counts(ds, Task::Factuality);
    CHECK(fact[0] == 162);
    CHECK(fact[1] == 249);
    CHECK(fact[2] == 453);
}

TEST_CASE("transitional bias labels drop the record from the bias task only") {
    TempDir dir;
    write_file(dir / "d.jsonl",
               R"({"medium_id":"a","domain_url":"https://a","raw_bias":"center-left","factuality":"high"})"
               "\n");
    Dataset ds = load_dataset(dir / "d.jsonl");
    REQUIRE(ds.size() == 1);
    CHECK_FALSE(ds.media()[0].bias.has_value());
    CHECK(ds.media()[0].raw_bias == RawBiasLabel::CenterLeft);
    CHECK(ds.media()[0].factuality == FactualityLabel::High);
    CHECK(label_counts(ds, Task::Bias) == std::array<long, 3>{0, 0, 0});
    CHECK(label_counts(ds, Task::Factuality) == std::array<long, 3>{0, 0, 1});
}

TEST_CASE("load-save-load round trip preserves records, unknown keys, provenance") {
    TempDir dir;
    const std::string snapshot =
        R"({"snapshot_id":"snap-7","timestamp":"2020-04-01T00:00:00Z"})"
        "\n"
        R"({"medium_id":"a","domain_url":"https://a","raw_bias":"extreme-right","factuality":"low","handles":{"twitter_handle":"aa","wikipedia_title":"A Site"},"mbfc_url":"https://x/a","note":7})"
        "\n"
        R"({"medium_id":"b","domain_url":"https://b"})"
        "\n";
    write_file(dir / "in.jsonl", snapshot);
    Dataset first = load_dataset(dir / "in.jsonl");
    CHECK(first.provenance().snapshot_id == "snap-7");
    CHECK(first.media()[0].extra.at("mbfc_url") == "https://x/a");
    CHECK(first.media()[0].extra.at("note") == 7);
    CHECK(first.media()[0].bias == BiasLabel::Right);

    save_dataset(first, dir / "out.jsonl");
    Dataset second = load_dataset(dir / "out.jsonl");
    CHECK(first == second);

    save_dataset(second, dir / "out2.jsonl");
    CHECK(read_file(dir / "out.jsonl") == read_file(dir / "out2.jsonl"));
}

TEST_CASE("snapshot without header uses the content hash as snapshot id") {
    TempDir dir;
    const std::string body = R"({"medium_id":"a","domain_url":"https://a"})" "\n";
    write_file(dir / "a.jsonl", body);
    Dataset ds = load_dataset(dir / "a.jsonl");
    CHECK(ds.provenance().snapshot_id == content_key(body));
}

TEST_CASE("label counts sum to the number of labeled records") {
    Gaussian g(404);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<MediumRecord> media;
        long bias_rows = 0, fact_rows = 0;
        const int n = 1 + static_cast<int>(g.raw() % 40);
        for (int i = 0; i < n; ++i) {
            MediumRecord m;
            m.medium_id = "m" + std::to_string(i);
            m.domain_url = "https://m" + std::to_string(i);
            if (g.raw() % 2) {
                m.raw_bias = static_cast<RawBiasLabel>(g.raw() % 7);
                m.bias = normalize_bias(*m.raw_bias);
                if (m.bias) ++bias_rows;
            }
            if (g.raw() % 2) {
                m.factuality = static_cast<FactualityLabel>(g.raw() % 3);
                ++fact_rows;
            }
            media.push_back(std::move(m));
        }
        Dataset ds(std::move(media), {});
        auto bias = label_counts(ds, Task::Bias);
        auto fact = label_counts(ds, Task::Factuality);
        CHECK(bias[0] + bias[1] + bias[2] == bias_rows);
        CHECK(fact[0] + fact[1] + fact[2] == fact_rows);
    }
}

TEST_CASE("find locates media by id") {
    Dataset ds = table1_dataset();
    const MediumRecord* m = ds.find("m0100");
    REQUIRE(m != nullptr);
    CHECK(m->medium_id == "m0100");
    CHECK(ds.find("nope") == nullptr);
}
