#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "actionimg/skeleton.hpp"

namespace actionimg {

/// 8-bit RGB image, rows = joints, columns = frames, interleaved storage.
class ActionImage {
public:
    ActionImage() = default;
    ActionImage(int rows, int cols) : rows_(rows), cols_(cols), data_(3 * std::size_t(rows) * cols, 0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    std::uint8_t& operator()(int row, int col, int channel) {
        return data_[(std::size_t(row) * cols_ + col) * 3 + channel];
    }
    std::uint8_t operator()(int row, int col, int channel) const {
        return data_[(std::size_t(row) * cols_ + col) * 3 + channel];
    }

    std::span<const std::uint8_t> bytes() const { return data_; }
    std::span<std::uint8_t> bytes() { return data_; }

    friend bool operator==(const ActionImage&, const ActionImage&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::uint8_t> data_;
};

struct EncodedImage {
    ActionImage image;
    /// Zero dynamic range; the image is all zeros.
    bool degenerate = false;
};

/// Dataset-wide coordinate range over a training split.
struct GlobalStats {
    double c_min = 0.0;
    double c_max = 0.0;

    std::string to_json() const;
    static GlobalStats from_json(const std::string& text);
    static GlobalStats load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

/// Ranges below this (input units) are treated as motionless.
inline constexpr double kDegenerateRange = 1e-9;

/// Translation-scale invariant mapping. Each channel k is shifted by its
/// per-sequence minimum and all three channels share the denominator
///   D = max_k (max_k - min_k),
/// so p = floor(255 * (c - min_k) / D), clamped to [0, 255]. The sequence
/// must already be merged to one actor stream and reordered by layout.
EncodedImage encode_proposed(const SkeletonSequence& seq);

/// Dataset-dependent mapping p = floor(255 * (c - c_min) / (c_max - c_min))
/// with one global range for every channel; coordinates are clamped into
/// the range first.
EncodedImage encode_baseline(const SkeletonSequence& seq, const GlobalStats& stats);

GlobalStats compute_global_stats(std::span<const SkeletonSequence> training);

enum class MappingKind { Proposed, Baseline };

struct MappingMode {
    MappingKind kind = MappingKind::Proposed;
    std::optional<GlobalStats> stats;  // required for Baseline

    EncodedImage encode(const SkeletonSequence& seq) const;
};

/// Real-valued RGB image in [0,1]: one row per channel, pixels row-major in
/// the columns.
template <typename Scalar>
struct Image {
    int height = 0;
    int width = 0;
    Eigen::Matrix<Scalar, 3, Eigen::Dynamic> data;
};

/// Corner-aligned bilinear resample to height x width, divided by 255.
template <typename Scalar>
Image<Scalar> resize(const ActionImage& img, int height, int width);

void export_png(const ActionImage& img, const std::filesystem::path& path);
ActionImage import_png(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

template <typename Scalar>
Image<Scalar> resize(const ActionImage& img, int height, int width) {
    Image<Scalar> out{height, width, Eigen::Matrix<Scalar, 3, Eigen::Dynamic>(3, height * width)};
    const int src_h = img.rows();
    const int src_w = img.cols();
    // Source coordinate of output index i on an axis of n samples.
    auto sample = [](int i, int n_out, int n_src, int& lo, int& hi, double& frac) {
        if (n_out <= 1 || n_src <= 1) {
            lo = hi = 0;
            frac = 0.0;
            return;
        }
        const double pos = static_cast<double>(i) * (n_src - 1) / (n_out - 1);
        lo = std::min(static_cast<int>(pos), n_src - 1);
        hi = std::min(lo + 1, n_src - 1);
        frac = pos - lo;
    };
    for (int y = 0; y < height; ++y) {
        int y0, y1;
        double fy;
        sample(y, height, src_h, y0, y1, fy);
        for (int x = 0; x < width; ++x) {
            int x0, x1;
            double fx;
            sample(x, width, src_w, x0, x1, fx);
            for (int c = 0; c < 3; ++c) {
                const double top = (1.0 - fx) * img(y0, x0, c) + fx * img(y0, x1, c);
                const double bottom = (1.0 - fx) * img(y1, x0, c) + fx * img(y1, x1, c);
                out.data(c, y * width + x) = static_cast<Scalar>(((1.0 - fy) * top + fy * bottom) / 255.0);
            }
        }
    }
    return out;
}

}  // namespace actionimg
