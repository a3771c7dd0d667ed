#include <doctest.h>

#include <random>

#include "xpatch/compose.hpp"
#include "xpatch/oracle.hpp"
#include "xpatch/reference.hpp"

using namespace xpatch;
using namespace xpatch::oracle;

namespace {

// Salience: uniform over a 4x4 box at (2,2)-(6,6) of an 8x8 frame.
SalienceMap uniform_box() {
    SalienceMap s{8, 8, std::vector<double>(64, 0.0)};
    for (int r = 2; r < 6; ++r)
        for (int c = 2; c < 6; ++c) s.weights[r * 8 + c] = 1.0 / 16;
    return s;
}

const Box kBox{2, 2, 6, 6};

Image gray(int h, int w, std::uint8_t v) { return Image(h, w, 1, v); }

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("target score") {
    Box gt{0, 0, 10, 10};
    CHECK(target_score({}, gt) == 0.0);
    std::vector<Detection> one{{gt, 0.93}};
    CHECK(target_score(one, gt) == 0.93);
    // IoU 0.6: a 10x6 box inside gt; IoU 0.3: 10x3
    std::vector<Detection> two{{{0, 0, 10, 6}, 0.4}, {{0, 0, 10, 3}, 0.9}};
    CHECK(iou(two[0].box, gt) == doctest::Approx(0.6));
    CHECK(iou(two[1].box, gt) == doctest::Approx(0.3));
    CHECK(target_score(two, gt) == 0.4);
    CHECK(iou(Box{0, 0, 1, 1}, Box{2, 2, 3, 3}) == 0.0);
}

TEST_CASE("synthetic oracle scores") {
    SyntheticCoverageOracle o(Modality::infrared, uniform_box(), 0.9, kBox, {32});
    auto clean = o.detect(gray(8, 8, 100), Modality::infrared);
    REQUIRE(clean.size() == 1);
    CHECK(clean[0].box == kBox);
    CHECK(clean[0].score == doctest::Approx(0.9));

    auto full = compose::apply_to_image(gray(8, 8, 100), [] {
        BinaryMask m(8, 8);
        for (int r = 2; r < 6; ++r)
            for (int c = 2; c < 6; ++c) m.set(r, c);
        return m;
    }(), std::vector<std::uint8_t>{32});
    CHECK(o.detect(full, Modality::infrared)[0].score == doctest::Approx(0.0));

    // 40% of the salience
    SalienceMap s{1, 10, std::vector<double>(10, 0.1)};
    SyntheticCoverageOracle line(Modality::infrared, s, 0.9, Box{0, 0, 10, 1}, {32});
    Image img = gray(1, 10, 100);
    for (int c = 0; c < 4; ++c) img.at(0, c) = 32;
    CHECK(line.detect(img, Modality::infrared)[0].score == doctest::Approx(0.54));
    CHECK(line.covered_mass(img) == doctest::Approx(0.4));

    // partial cover: strictly between
    Image part = gray(8, 8, 100);
    part.at(3, 3) = 32;
    double sc = o.detect(part, Modality::infrared)[0].score;
    CHECK(sc > 0);
    CHECK(sc < 0.9);
    CHECK(sc == doctest::Approx(0.9 * (1 - 1.0 / 16)));
    CHECK(o.query_count() == 3);
}

TEST_CASE("synthetic oracle validation") {
    auto bad = uniform_box();
    bad.weights[2 * 8 + 2] = 0.5;
    CHECK_THROWS(SyntheticCoverageOracle(Modality::visible, bad, 0.9, kBox, {255, 255, 255}));
    auto outside = uniform_box();
    outside.weights[0] = 0.01;
    CHECK_THROWS(SyntheticCoverageOracle(Modality::visible, outside, 0.9, kBox, {255, 255, 255}));
    CHECK_THROWS(SyntheticCoverageOracle(Modality::visible, uniform_box(), 0.0, kBox, {255, 255, 255}));
    CHECK_THROWS(SyntheticCoverageOracle(Modality::visible, uniform_box(), 1.2, kBox, {255, 255, 255}));
    auto neg = uniform_box();
    neg.weights[2 * 8 + 2] = -1.0 / 16;
    neg.weights[2 * 8 + 3] = 3.0 / 16;
    CHECK_THROWS(SyntheticCoverageOracle(Modality::visible, neg, 0.9, kBox, {255, 255, 255}));
    SyntheticCoverageOracle ok(Modality::visible, uniform_box(), 0.9, kBox, {255, 255, 255});
    CHECK_THROWS(ok.detect(Image(8, 8, 3), Modality::infrared));
    CHECK_THROWS(ok.detect(Image(8, 9, 3), Modality::visible));
    CHECK(ok.query_count() == 0);
    auto d = ok.descriptor();
    CHECK(d.modality == Modality::visible);
    CHECK(d.kind == Kind::synthetic_coverage);
    CHECK(d.max_concurrency >= 1);
}

TEST_CASE("synthetic score is monotone in coverage") {
    std::mt19937_64 rng(21);
    SalienceMap s{10, 10, std::vector<double>(100)};
    double total = 0;
    for (auto& w : s.weights) total += (w = std::uniform_real_distribution<double>(0, 1)(rng));
    for (auto& w : s.weights) w /= total;
    SyntheticCoverageOracle o(Modality::infrared, s, 0.95, Box{0, 0, 10, 10}, {32});
    for (int t = 0; t < 20; ++t) {
        Image img = gray(10, 10, 90);
        double prev = o.detect(img, Modality::infrared)[0].score;
        std::vector<int> order(100);
        for (int i = 0; i < 100; ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        for (int k : order) {
            img.at(k / 10, k % 10) = 32;
            double now = o.detect(img, Modality::infrared)[0].score;
            CHECK(now <= prev + 1e-15);
            prev = now;
        }
        CHECK(prev == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("best fixed-shape cover matches exhaustive search") {
    // 16x16 map, place a 3x3 square cover anywhere; the oracle's minimum over
    // placements equals the brute-force maximum salience window.
    std::mt19937_64 rng(22);
    SalienceMap s{16, 16, std::vector<double>(256)};
    double total = 0;
    for (auto& w : s.weights) total += (w = std::exponential_distribution<double>(1)(rng));
    for (auto& w : s.weights) w /= total;
    SyntheticCoverageOracle o(Modality::infrared, s, 0.9, Box{0, 0, 16, 16}, {32});
    double best_mass = 0, best_score = 1;
    for (int r = 0; r + 3 <= 16; ++r)
        for (int c = 0; c + 3 <= 16; ++c) {
            double m = 0;
            for (int dr = 0; dr < 3; ++dr)
                for (int dc = 0; dc < 3; ++dc) m += s.at(r + dr, c + dc);
            best_mass = std::max(best_mass, m);
            Image img = gray(16, 16, 90);
            for (int dr = 0; dr < 3; ++dr)
                for (int dc = 0; dc < 3; ++dc) img.at(r + dr, c + dc) = 32;
            best_score = std::min(best_score, o.detect(img, Modality::infrared)[0].score);
        }
    CHECK(best_score == doctest::Approx(0.9 * (1 - best_mass)).epsilon(1e-12));
}

TEST_CASE("median smoothing") {
    Image img(9, 7, 3);
    std::mt19937 rng(5);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng());
    CHECK(smooth(img, 1) == img);
    CHECK(smooth(Image(5, 5, 1, 77), 3) == Image(5, 5, 1, 77));
    CHECK_THROWS(smooth(img, 2));
    CHECK_THROWS(smooth(img, 0));
    auto s3 = smooth(img, 3);
    CHECK(smooth(s3, 1) == s3);
    CHECK(s3 == reference::median_smooth_serial(img, 3));
    CHECK(smooth(img, 5) == reference::median_smooth_serial(img, 5));
    // spot check one interior pixel by hand
    std::vector<int> nb;
    for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) nb.push_back(img.at(4 + dr, 3 + dc, 1));
    std::sort(nb.begin(), nb.end());
    CHECK(s3.at(4, 3, 1) == nb[4]);
    // corner uses replicated edges
    std::vector<int> cn;
    for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) cn.push_back(img.at(std::max(0, dr), std::max(0, dc), 0));
    std::sort(cn.begin(), cn.end());
    CHECK(s3.at(0, 0, 0) == cn[4]);
}

TEST_CASE("smoothing leaves cover interiors untouched") {
    Image img(20, 20, 1);
    std::mt19937 rng(6);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng());
    BinaryMask m(20, 20);
    for (int r = 4; r < 15; ++r)
        for (int c = 3; c < 12 + r % 3; ++c) m.set(r, c);
    auto adv = compose::apply_to_image(img, m, std::vector<std::uint8_t>{32});
    for (int w : {3, 5}) {
        auto s = smooth(adv, w);
        auto inner = compose::erode_square(m, w / 2);
        for (int r = 0; r < 20; ++r)
            for (int c = 0; c < 20; ++c)
                if (inner.get(r, c)) CHECK(s.at(r, c) == 32);
    }
}

TEST_CASE("smoothed oracle wraps and counts") {
    auto inner = std::make_shared<SyntheticCoverageOracle>(Modality::infrared, uniform_box(), 0.9, kBox,
                                                           std::vector<std::uint8_t>{32});
    SmoothedOracle d(inner, 3);
    Image img = gray(8, 8, 100);
    img.at(3, 3) = 32;  // isolated pixel is removed by the median
    CHECK(d.detect(img, Modality::infrared)[0].score == doctest::Approx(0.9));
    CHECK(d.query_count() == 1);
    CHECK(inner->query_count() == 1);
    CHECK(d.kind() == Kind::smoothed);
    SmoothedOracle one(inner, 1);
    CHECK(one.detect(img, Modality::infrared)[0].score < 0.9);
}

}
