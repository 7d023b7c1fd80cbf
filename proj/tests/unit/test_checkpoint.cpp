#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "neuromix/checkpoint.hpp"
#include "neuromix/error.hpp"
#include "support/oracles.hpp"

using namespace neuromix;
namespace fs = std::filesystem;
namespace nt = neuromix::testing;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("neuromix-ckpt-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("checkpoint round trip") {
    TempDir tmp;
    Model model = Model::build(parse_arch("C3 M F5 F4", {2, 6, 6}), 11);
    RelevanceStats stats(4);
    stats.mu = {0.1, -0.2, 1e-17, 3.5};
    stats.sigma = {1.0, 0.3, 2.0, 1e-5};
    const nlohmann::json config = {{"gamma", 5.0}, {"arch", "C3 M F5 F4"}};
    save_checkpoint(tmp.path / "m.json", model, stats, config);

    Checkpoint ck = load_checkpoint(tmp.path / "m.json");
    CHECK(ck.model.arch().render() == "C3 M F5 F4");
    CHECK(ck.model.input_shape() == Shape{2, 6, 6});
    CHECK(ck.stats.mu == stats.mu);
    CHECK(ck.stats.sigma == stats.sigma);
    CHECK(ck.config == config);
    auto a = model.parameters(), b = ck.model.parameters();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i]->value == b[i]->value);

    std::mt19937_64 rng(2);
    Tensor batch({3, 2, 6, 6}, nt::random_vector(216, rng));
    CHECK(ck.model.forward_relevance(batch) == model.forward_relevance(batch));
}

TEST_CASE("corrupted checkpoints are rejected") {
    TempDir tmp;
    Model model = Model::build(parse_arch("F3 F2", {2}), 1);
    nlohmann::json good = checkpoint_to_json(model, RelevanceStats(2), {});

    auto write = [&](const std::string& text) {
        std::ofstream(tmp.path / "bad.json") << text;
        return tmp.path / "bad.json";
    };
    CHECK_THROWS_AS(load_checkpoint(write("{not json")), FormatError);
    CHECK_THROWS_AS(load_checkpoint(tmp.path / "absent.json"), FormatError);

    nlohmann::json j = good;
    j["format"] = "something-else";
    CHECK_THROWS_AS(load_checkpoint(write(j.dump())), FormatError);

    j = good;
    j["layers"][0]["weight"]["data"].erase(0);
    CHECK_THROWS_AS(checkpoint_from_json(j), FormatError);

    j = good;
    j["stats"]["sigma"] = {1.0};
    CHECK_THROWS_AS(checkpoint_from_json(j), FormatError);

    j = good;
    j["arch"] = "F3 F7";
    CHECK_THROWS_AS(checkpoint_from_json(j), FormatError);

    j = good;
    j.erase("layers");
    CHECK_THROWS_AS(checkpoint_from_json(j), FormatError);

    CHECK_NOTHROW(checkpoint_from_json(good));
}
