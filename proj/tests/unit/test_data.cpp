#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "neuromix/augment.hpp"
#include "neuromix/baselines.hpp"
#include "neuromix/data.hpp"
#include "neuromix/error.hpp"
#include "neuromix/metrics.hpp"
#include "support/oracles.hpp"

using namespace neuromix;
namespace fs = std::filesystem;
namespace nt = neuromix::testing;

namespace {

const fs::path kFixtures = NEUROMIX_FIXTURE_DIR;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("neuromix-data-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::size_t parse_error_position(const fs::path& p) {
    try {
        load_csv(p);
    } catch (const ParseError& e) {
        return e.position();
    }
    return 0;
}

}  // namespace

TEST_CASE("load_csv") {
    Dataset plain = load_csv(kFixtures / "plain.csv");
    CHECK(plain.size() == 3);
    CHECK(plain.sample_shape() == Shape{2});
    CHECK_FALSE(plain.labels.has_value());
    CHECK(plain.samples == Tensor::matrix({{0, 0}, {1, 1}, {2, 2}}));

    Dataset labeled = load_csv(kFixtures / "tiny_labeled.csv");
    CHECK(labeled.samples == Tensor::matrix({{0.5, 1.5}, {-2, 3.25}, {4, 0}}));
    REQUIRE(labeled.labels.has_value());
    CHECK(*labeled.labels == std::vector<int>{0, 1, 1});
    CHECK(labeled.num_classes() == 2);

    TempDir tmp;
    write_text(tmp.path / "ragged.csv", "1,2\n3,4\n5\n");
    CHECK(parse_error_position(tmp.path / "ragged.csv") == 3);
    write_text(tmp.path / "word.csv", "x,y\n1,2\n3,abc\n");
    CHECK(parse_error_position(tmp.path / "word.csv") == 3);
    write_text(tmp.path / "empty.csv", "");
    CHECK_THROWS_AS(load_csv(tmp.path / "empty.csv"), DataError);
    CHECK_THROWS_AS(load_csv(tmp.path / "missing.csv"), DataError);
}

TEST_CASE("csv round trip") {
    TempDir tmp;
    std::mt19937_64 rng(1);
    Dataset d;
    d.samples = Tensor({50, 3}, nt::random_vector(150, rng, -1e3, 1e3));
    d.labels = std::vector<int>(50);
    for (std::size_t i = 0; i < 50; ++i) (*d.labels)[i] = static_cast<int>(i % 4);
    write_csv(tmp.path / "rt.csv", d);
    Dataset back = load_csv(tmp.path / "rt.csv");
    CHECK(back.labels == d.labels);
    for (std::size_t i = 0; i < 150; ++i) CHECK(std::abs(back.samples[i] - d.samples[i]) <= 1e-12);
}

TEST_CASE("load_idx") {
    TempDir tmp;
    // Two 2x2 images and two labels, laid out per the IDX format.
    write_bytes(tmp.path / "img", {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 255, 51, 102, 255, 0, 0, 255});
    write_bytes(tmp.path / "lbl", {0, 0, 8, 1, 0, 0, 0, 2, 7, 3});
    Dataset d = load_idx(tmp.path / "img", tmp.path / "lbl");
    CHECK(d.kind == DataKind::image);
    CHECK(d.samples.shape() == Shape{2, 1, 2, 2});
    CHECK(d.samples == Tensor({2, 1, 2, 2}, std::vector<double>{0, 1, 0.2, 0.4, 1, 0, 0, 1}));
    CHECK(*d.labels == std::vector<int>{7, 3});

    write_bytes(tmp.path / "lbl3", {0, 0, 8, 1, 0, 0, 0, 3, 7, 3, 1});
    CHECK_THROWS_AS(load_idx(tmp.path / "img", tmp.path / "lbl3"), DataError);
    write_bytes(tmp.path / "empty", {});
    CHECK_THROWS_AS(load_idx(tmp.path / "empty"), DataError);
    write_bytes(tmp.path / "magic", {0, 0, 8, 1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0});
    CHECK_THROWS_AS(load_idx(tmp.path / "magic"), DataError);
    write_bytes(tmp.path / "short", {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 255, 51});
    CHECK_THROWS_AS(load_idx(tmp.path / "short"), DataError);

    write_idx(tmp.path / "img2", tmp.path / "lbl2", d);
    Dataset again = load_idx(tmp.path / "img2", tmp.path / "lbl2");
    CHECK(again.samples == d.samples);
    CHECK(again.labels == d.labels);
}

TEST_CASE("sobel_preprocess") {
    Tensor flat({1, 5, 5}, 0.37);
    CHECK(sobel_preprocess(flat) == Tensor({2, 5, 5}));
    CHECK(sobel_preprocess(Tensor({3, 4, 4}, 0.8)) == Tensor({2, 4, 4}));

    // Vertical step: left half 0, right half 1.
    Tensor step({1, 5, 6});
    for (std::size_t y = 0; y < 5; ++y)
        for (std::size_t x = 3; x < 6; ++x) step[y * 6 + x] = 1.0;
    Tensor s = sobel_preprocess(step);
    CHECK(s.shape() == Shape{2, 5, 6});
    // Kernel [-1 0 1; -2 0 2; -1 0 1] straddling the edge gives 1 + 2 + 1.
    for (std::size_t y = 1; y < 4; ++y) {
        CHECK(s[y * 6 + 2] == 4.0);
        CHECK(s[y * 6 + 3] == 4.0);
        CHECK(s[y * 6 + 0] == 0.0);
        for (std::size_t x = 0; x < 6; ++x) CHECK(s[30 + y * 6 + x] == 0.0);
    }

    // Transposing the image swaps the channels.
    std::mt19937_64 rng(6);
    Tensor img({1, 4, 4}, nt::random_vector(16, rng, 0, 1));
    Tensor tr({1, 4, 4});
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x) tr[x * 4 + y] = img[y * 4 + x];
    Tensor a = sobel_preprocess(img), b = sobel_preprocess(tr);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x) {
            CHECK(b[x * 4 + y] == doctest::Approx(a[16 + y * 4 + x]).epsilon(1e-14));
            CHECK(b[16 + x * 4 + y] == doctest::Approx(a[y * 4 + x]).epsilon(1e-14));
        }
}

TEST_CASE("augment") {
    std::mt19937_64 rng(3);
    Tensor img({1, 8, 8}, nt::random_vector(64, rng, 0, 1));

    std::mt19937_64 r1(5);
    CHECK(augment(img, AugmentConfig::identity(), r1) == img);
    CHECK(AugmentConfig::identity().is_identity());

    std::mt19937_64 ra(99), rb(99);
    AugmentConfig full;
    Tensor x = augment(img, full, ra), y = augment(img, full, rb);
    CHECK(x == y);
    CHECK(x.shape() == img.shape());
    for (double v : x.data()) CHECK((v >= 0.0 && v <= 1.0));

    AugmentConfig bright = AugmentConfig::identity();
    bright.brightness = true;
    for (int trial = 0; trial < 20; ++trial) {
        const double c = 0.9;
        std::mt19937_64 r(trial), probe(trial);
        const double b = std::uniform_real_distribution<double>(-0.2, 0.2)(probe);
        Tensor out = augment(Tensor({1, 4, 4}, c), bright, r);
        for (double v : out.data()) CHECK(v == doctest::Approx(std::clamp(c + b, 0.0, 1.0)).epsilon(1e-14));
    }

    AugmentConfig bad;
    bad.crop_min = 0.9;
    bad.crop_max = 0.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    Dataset ds;
    ds.kind = DataKind::image;
    ds.samples = Tensor({3, 1, 8, 8}, nt::random_vector(192, rng, 0, 1));
    CHECK(augment_dataset(ds, full, 1, 0).samples == augment_dataset(ds, full, 1, 0).samples);
    CHECK_FALSE(augment_dataset(ds, full, 1, 0).samples == augment_dataset(ds, full, 1, 1).samples);
}

TEST_CASE("make_blobs") {
    Dataset d = make_blobs(4, 25, 10.0, 17);
    CHECK(d.size() == 100);
    std::vector<int> counts(4);
    for (int l : *d.labels) ++counts[static_cast<std::size_t>(l)];
    CHECK(counts == std::vector<int>{25, 25, 25, 25});
    CHECK(make_blobs(4, 25, 10.0, 17).samples == d.samples);

    Dataset two = make_blobs(2, 100, 10.0, 3);
    KMeansResult km = kmeans(two.samples, 2, 3);
    CHECK(unsupervised_accuracy(km.assignments, *two.labels) == 1.0);
}

TEST_CASE("make_batches") {
    auto b = make_batches(256, 128, 1, 0);
    REQUIRE(b.size() == 2);
    std::set<std::size_t> seen;
    for (const auto& batch : b) seen.insert(batch.begin(), batch.end());
    CHECK(seen.size() == 256);

    auto e0 = make_batches(300, 128, 1, 0), e1 = make_batches(300, 128, 1, 1);
    CHECK(e0.size() == 2);
    CHECK(e0 == make_batches(300, 128, 1, 0));
    CHECK(e0 != e1);
    auto dropped = [](const std::vector<std::vector<std::size_t>>& batches) {
        std::set<std::size_t> kept;
        for (const auto& x : batches) kept.insert(x.begin(), x.end());
        return 300 - kept.size();
    };
    CHECK(dropped(e0) == 44);
    CHECK(make_batches(300, 128, 1, 0, false).size() == 3);

    CHECK_THROWS_AS(make_batches(10, 1, 0, 0), ConfigError);
    CHECK_THROWS_AS(make_batches(10, 11, 0, 0), ConfigError);
    auto seq = sequential_batches(300, 128);
    CHECK(seq.size() == 3);
    CHECK(seq[2].size() == 44);
}

TEST_CASE("dataset helpers") {
    Dataset d = make_blobs(3, 4, 8.0, 1);
    const std::vector<std::size_t> idx{11, 0};
    Tensor g = d.gather(idx);
    CHECK(g.at(0, 0) == d.samples.at(11, 0));
    CHECK(g.at(1, 1) == d.samples.at(0, 1));
    CHECK(d.head(5).size() == 5);
    CHECK(d.head(100).size() == 12);
}
