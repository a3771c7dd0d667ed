#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "xpatch/image.hpp"
#include "xpatch/types.hpp"

namespace xpatch::oracle {

struct Detection {
    Box box;
    double score = 0.0;
    friend bool operator==(const Detection&, const Detection&) = default;
};

enum class Kind { synthetic_coverage, external, smoothed };

struct OracleDescriptor {
    Modality modality = Modality::visible;
    Kind kind = Kind::synthetic_coverage;
    int max_concurrency = 1;
    std::uint64_t query_counter = 0;
};

/// Black-box detector for one modality. `detect` counts exactly one query
/// per image that was actually scored; failed external calls are not counted.
/// Implementations must be safe to call from several threads.
class DetectorOracle {
public:
    virtual ~DetectorOracle() = default;

    std::vector<Detection> detect(const Image& image, Modality modality);

    virtual Modality modality() const = 0;
    virtual Kind kind() const = 0;
    virtual int max_concurrency() const = 0;

    std::uint64_t query_count() const { return queries_.load(); }
    OracleDescriptor descriptor() const { return {modality(), kind(), max_concurrency(), query_count()}; }

protected:
    virtual std::vector<Detection> detect_impl(const Image& image) = 0;

private:
    std::atomic<std::uint64_t> queries_{0};
};

inline constexpr double kTargetIou = 0.5;

/// Highest score among detections overlapping gt_box with IoU >= 0.5; 0 if none.
double target_score(std::span<const Detection> detections, const Box& gt_box);

/// h x w non-negative weights; the mass inside the scene's ground-truth box sums to 1.
struct SalienceMap {
    int height = 0;
    int width = 0;
    std::vector<double> weights;

    double at(int row, int col) const { return weights[static_cast<std::size_t>(row) * width + col]; }
};

/// Deterministic stand-in detector: a single box at gt_box whose score is
/// base * (1 - salience mass on pixels showing the cover value).
class SyntheticCoverageOracle final : public DetectorOracle {
public:
    SyntheticCoverageOracle(Modality modality, SalienceMap salience, double base, Box gt_box,
                            std::vector<std::uint8_t> cover_value, int max_concurrency = 64);

    Modality modality() const override { return modality_; }
    Kind kind() const override { return Kind::synthetic_coverage; }
    int max_concurrency() const override { return max_concurrency_; }

    /// Salience mass on cells currently showing the cover value.
    double covered_mass(const Image& image) const;
    double base() const { return base_; }

protected:
    std::vector<Detection> detect_impl(const Image& image) override;

private:
    struct Cell {
        int row, col;
        double weight;
    };
    Modality modality_;
    int height_, width_;
    std::vector<Cell> cells_;
    double base_;
    Box gt_box_;
    std::vector<std::uint8_t> cover_;
    int max_concurrency_;
};

/// Per-channel median filter with edge replication; `window` must be odd.
Image smooth(const Image& image, int window);

/// Runs `inner` on median-smoothed inputs (spatial-smoothing defense).
class SmoothedOracle final : public DetectorOracle {
public:
    SmoothedOracle(std::shared_ptr<DetectorOracle> inner, int window);

    Modality modality() const override { return inner_->modality(); }
    Kind kind() const override { return Kind::smoothed; }
    int max_concurrency() const override { return inner_->max_concurrency(); }

protected:
    std::vector<Detection> detect_impl(const Image& image) override;

private:
    std::shared_ptr<DetectorOracle> inner_;
    int window_;
};

}  // namespace xpatch::oracle
