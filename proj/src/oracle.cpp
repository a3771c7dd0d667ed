#include "xpatch/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xpatch/reference.hpp"

namespace xpatch {

double iou(const Box& a, const Box& b) {
    double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (ix <= 0 || iy <= 0) return 0.0;
    double inter = ix * iy;
    double uni = a.area() + b.area() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

std::string to_string(Modality m) { return m == Modality::visible ? "visible" : "infrared"; }

Modality parse_modality(const std::string& s) {
    if (s == "visible") return Modality::visible;
    if (s == "infrared") return Modality::infrared;
    throw std::invalid_argument("unknown modality '" + s + "'");
}

namespace oracle {

std::vector<Detection> DetectorOracle::detect(const Image& image, Modality modality) {
    if (modality != this->modality())
        throw std::invalid_argument("detect: oracle serves " + to_string(this->modality()) + ", asked for " +
                                    to_string(modality));
    auto out = detect_impl(image);
    queries_.fetch_add(1);
    return out;
}

double target_score(std::span<const Detection> detections, const Box& gt_box) {
    double best = 0.0;
    for (const auto& d : detections)
        if (iou(d.box, gt_box) >= kTargetIou) best = std::max(best, d.score);
    return best;
}

SyntheticCoverageOracle::SyntheticCoverageOracle(Modality modality, SalienceMap salience, double base, Box gt_box,
                                                 std::vector<std::uint8_t> cover_value, int max_concurrency)
    : modality_(modality),
      height_(salience.height),
      width_(salience.width),
      base_(base),
      gt_box_(gt_box),
      cover_(std::move(cover_value)),
      max_concurrency_(max_concurrency) {
    if (!(base > 0 && base <= 1)) throw std::invalid_argument("synthetic oracle: base must lie in (0, 1]");
    if (salience.weights.size() != static_cast<std::size_t>(height_) * width_)
        throw std::invalid_argument("synthetic oracle: salience map has wrong size");
    if (max_concurrency < 1) throw std::invalid_argument("synthetic oracle: max_concurrency must be >= 1");
    double inside = 0, total = 0;
    for (int r = 0; r < height_; ++r)
        for (int c = 0; c < width_; ++c) {
            double w = salience.at(r, c);
            if (!(w >= 0) || !std::isfinite(w)) throw std::invalid_argument("synthetic oracle: negative salience");
            if (w == 0) continue;
            total += w;
            if (gt_box.contains({c + 0.5, r + 0.5})) inside += w;
            cells_.push_back({r, c, w});
        }
    if (std::abs(inside - 1.0) > 1e-9 || std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("synthetic oracle: salience must sum to 1 inside the ground-truth box");
}

double SyntheticCoverageOracle::covered_mass(const Image& image) const {
    if (image.height() != height_ || image.width() != width_ ||
        static_cast<std::size_t>(image.channels()) != cover_.size())
        throw std::invalid_argument("synthetic oracle: image does not match the salience map");
    double covered = 0;
    for (const auto& cell : cells_) {
        auto px = image.pixel(cell.row, cell.col);
        if (std::equal(px.begin(), px.end(), cover_.begin())) covered += cell.weight;
    }
    return covered;
}

std::vector<Detection> SyntheticCoverageOracle::detect_impl(const Image& image) {
    double score = std::clamp(base_ * (1.0 - covered_mass(image)), 0.0, 1.0);
    return {Detection{gt_box_, score}};
}

namespace {

void smooth_row(const Image& in, Image& out, int r, int radius, std::vector<std::uint8_t>& buf) {
    const int h = in.height(), w = in.width(), ch = in.channels();
    for (int c = 0; c < w; ++c)
        for (int k = 0; k < ch; ++k) {
            buf.clear();
            for (int dr = -radius; dr <= radius; ++dr) {
                int rr = std::clamp(r + dr, 0, h - 1);
                for (int dc = -radius; dc <= radius; ++dc) buf.push_back(in.at(rr, std::clamp(c + dc, 0, w - 1), k));
            }
            auto mid = buf.begin() + buf.size() / 2;
            std::nth_element(buf.begin(), mid, buf.end());
            out.at(r, c, k) = *mid;
        }
}

void check_window(int window) {
    if (window < 1 || window % 2 == 0) throw std::invalid_argument("smooth: window must be odd and >= 1");
}

}  // namespace

Image smooth(const Image& image, int window) {
    check_window(window);
    if (window == 1) return image;
    Image out(image.height(), image.width(), image.channels());
    const int radius = window / 2;
#pragma omp parallel
    {
        std::vector<std::uint8_t> buf;
#pragma omp for schedule(static)
        for (int r = 0; r < image.height(); ++r) smooth_row(image, out, r, radius, buf);
    }
    return out;
}

SmoothedOracle::SmoothedOracle(std::shared_ptr<DetectorOracle> inner, int window)
    : inner_(std::move(inner)), window_(window) {
    check_window(window);
    if (!inner_) throw std::invalid_argument("SmoothedOracle: null inner oracle");
}

std::vector<Detection> SmoothedOracle::detect_impl(const Image& image) {
    return inner_->detect(smooth(image, window_), inner_->modality());
}

}  // namespace oracle

namespace reference {

Image median_smooth_serial(const Image& image, int window) {
    oracle::check_window(window);
    if (window == 1) return image;
    Image out(image.height(), image.width(), image.channels());
    std::vector<std::uint8_t> buf;
    for (int r = 0; r < image.height(); ++r) oracle::smooth_row(image, out, r, window / 2, buf);
    return out;
}

}  // namespace reference
}  // namespace xpatch
