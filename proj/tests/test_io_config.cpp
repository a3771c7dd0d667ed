#include <doctest.h>

#include <filesystem>
#include <random>

#include "xpatch/config.hpp"
#include "xpatch/png_io.hpp"

using namespace xpatch;
namespace fs = std::filesystem;

TEST_SUITE("io") {

TEST_CASE("png round trip") {
    std::mt19937 rng(1);
    for (int ch : {1, 3}) {
        Image img(13, 7, ch);
        for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng());
        auto bytes = io::encode_png(img);
        CHECK(io::decode_png(bytes) == img);
    }
    std::vector<std::uint8_t> junk{1, 2, 3, 4, 5};
    CHECK_THROWS(io::decode_png(junk));
}

TEST_CASE("png files and masks") {
    auto dir = fs::temp_directory_path() / "xpatch_io_test";
    fs::create_directories(dir);
    BinaryMask m(6, 9);
    m.set(1, 2);
    m.set(5, 8);
    io::write_mask_png(dir / "m.png", m);
    CHECK(io::read_mask_png(dir / "m.png") == m);
    auto raw = io::read_png(dir / "m.png");
    CHECK(raw.channels() == 1);
    CHECK(raw.at(1, 2) == 255);
    CHECK(raw.at(0, 0) == 0);
    CHECK_THROWS(io::read_png(dir / "missing.png"));
    fs::remove_all(dir);
}

TEST_CASE("base64") {
    std::string s = "any carnal pleas";
    std::vector<std::uint8_t> b(s.begin(), s.end());
    for (std::size_t n = 0; n <= b.size(); ++n) {
        std::vector<std::uint8_t> part(b.begin(), b.begin() + n);
        CHECK(io::base64_decode(io::base64_encode(part)) == part);
    }
    CHECK(io::base64_encode(std::vector<std::uint8_t>{'M', 'a'}) == "TWE=");
    CHECK(io::base64_encode(std::vector<std::uint8_t>{}).empty());
    CHECK_THROWS(io::base64_decode("T!=="));
}

}

TEST_SUITE("config") {

TEST_CASE("defaults") {
    RunConfig c;
    CHECK(c.population_size == 30);
    CHECK(c.max_generations == 200);
    CHECK(c.lambda == 2);
    CHECK(c.thre == 0.7);
    CHECK(c.patch_count == 2);
    CHECK(c.anchors_per_patch == 8);
    CHECK(c.de_F == 0.5);
    CHECK(c.de_CR == 0.7);
    CHECK(c.radius_fraction == 0.16);
    CHECK(c.inner_fraction == 0.3);
    CHECK(c.outer_shrink == 0.8);
    CHECK(c.samples_per_segment == 32);
    CHECK(c.fitness_mode == fitness::Mode::joint);
    CHECK(c.cover.infrared_value == 32);
    CHECK(c.patch_centers[0] == Point2{0.5, 0.35});
    CHECK(c.patch_centers[1] == Point2{0.5, 0.6});
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("round trip") {
    RunConfig c;
    CHECK(RunConfig::parse(c.serialize()) == c);
    c.lambda = 0.1 + 0.2;
    c.seed = 18446744073709551615ull;
    c.fitness_mode = fitness::Mode::sum;
    c.patch_count = 3;
    c.patch_centers = {{0.1, 0.2}, {0.3, 1.0 / 3}, {0.9, 0.95}};
    c.cover.visible_value = {1, 2, 3};
    c.translate_mode = TranslateMode::per_patch;
    auto back = RunConfig::parse(c.serialize());
    CHECK(back == c);
    CHECK(back.lambda == c.lambda);
    CHECK(back.patch_centers[1].y == c.patch_centers[1].y);
    CHECK(RunConfig::parse(back.serialize()).serialize() == c.serialize());
}

TEST_CASE("random round trips") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.01, 0.5);
    for (int t = 0; t < 100; ++t) {
        RunConfig c;
        c.lambda = u(rng) * 10;
        c.de_F = u(rng);
        c.de_CR = u(rng);
        c.radius_fraction = u(rng);
        c.seed = rng();
        c.patch_count = 1 + t % 4;
        c.patch_centers = default_patch_centers(c.patch_count);
        CHECK(RunConfig::parse(c.serialize()) == c);
    }
}

TEST_CASE("parse details") {
    auto c = RunConfig::parse("# comment\n\nlambda = 3\n  seed=9  \npatch_count = 1\n");
    CHECK(c.lambda == 3);
    CHECK(c.seed == 9);
    CHECK(c.patch_centers.size() == 1);
    CHECK_THROWS_AS(RunConfig::parse("nonsense = 1\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("lambda = abc\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("lambda\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::load("/nonexistent/file.txt"), ConfigError);
    RunConfig d;
    CHECK_THROWS_AS(d.set("fitness_mode", "max"), ConfigError);
    CHECK_THROWS_AS(d.set("cover_visible", "1,2"), ConfigError);
    CHECK_THROWS_AS(d.set("cover_infrared", "300"), ConfigError);
}

TEST_CASE("validation") {
    auto bad = [](auto mutate) {
        RunConfig c;
        mutate(c);
        CHECK_THROWS_AS(c.validate(), ConfigError);
    };
    bad([](RunConfig& c) { c.population_size = 3; });
    bad([](RunConfig& c) { c.lambda = 0; });
    bad([](RunConfig& c) { c.thre = 1; });
    bad([](RunConfig& c) { c.patch_count = 3; });
    bad([](RunConfig& c) { c.anchors_per_patch = 3; });
    bad([](RunConfig& c) { c.de_CR = 1.5; });
    bad([](RunConfig& c) { c.inner_fraction = 0.6; });
    bad([](RunConfig& c) { c.outer_shrink = 0; });
    bad([](RunConfig& c) { c.samples_per_segment = 1; });
}

TEST_CASE("patch centers nest") {
    auto two = default_patch_centers(2), three = default_patch_centers(3);
    CHECK(two[0] == three[0]);
    CHECK(two[1] == three[1]);
    CHECK(default_patch_centers(6).size() == 6);
}

}
