#include "actionimg/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "actionimg/errors.hpp"
#include "actionimg/rng.hpp"

namespace actionimg {

void AugmentationSpec::validate() const {
    if (!(rotation_deg >= 0.0 && rotation_deg <= kMaxRotationDeg))
        throw ConfigError("augment: rotation_deg must lie in [0, 30]");
    if (!(noise_sigma >= 0.0)) throw ConfigError("augment: noise_sigma must be >= 0");
    if (!std::isfinite(noise_mean)) throw ConfigError("augment: noise_mean must be finite");
    if (!(crop_min > 0.0 && crop_min <= crop_max && crop_max <= 1.0))
        throw ConfigError("augment: need 0 < crop_min <= crop_max <= 1");
    if (multiplicity < 0) throw ConfigError("augment: multiplicity must be >= 0");
}

Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& angles_deg) {
    const Eigen::Vector3d rad = angles_deg * (std::numbers::pi / 180.0);
    return (Eigen::AngleAxisd(rad.z(), Eigen::Vector3d::UnitZ()) *
            Eigen::AngleAxisd(rad.y(), Eigen::Vector3d::UnitY()) *
            Eigen::AngleAxisd(rad.x(), Eigen::Vector3d::UnitX()))
        .toRotationMatrix();
}

Eigen::Vector3d centroid(const SkeletonSequence& seq) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Index count = 0;
    for (const auto& frame : seq.frames)
        for (const auto& actor : frame.actors) {
            sum += actor.joints.rowwise().sum();
            count += actor.joints.cols();
        }
    return count > 0 ? Eigen::Vector3d(sum / static_cast<double>(count)) : sum;
}

SkeletonSequence rotate(const SkeletonSequence& seq, const Eigen::Matrix3d& rotation) {
    const Eigen::Vector3d center = centroid(seq);
    SkeletonSequence out = seq;
    for (auto& frame : out.frames)
        for (auto& actor : frame.actors)
            actor.joints = (rotation * (actor.joints.colwise() - center)).colwise() + center;
    return out;
}

SkeletonSequence rotate(const SkeletonSequence& seq, const Eigen::Vector3d& angles_deg) {
    if ((angles_deg.array().abs() > kMaxRotationDeg).any() || !angles_deg.allFinite())
        throw ConfigError("rotation angles must lie in [-30, 30] degrees");
    return rotate(seq, rotation_matrix(angles_deg));
}

SkeletonSequence add_noise(const SkeletonSequence& seq, double mean, double sigma,
                           std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
    SkeletonSequence out = seq;
    if (sigma == 0.0) {
        if (mean != 0.0)
            for (auto& frame : out.frames)
                for (auto& actor : frame.actors) actor.joints.array() += mean;
        return out;
    }
    auto rng = seeded_rng({seed});
    std::normal_distribution<double> dist(mean, sigma);
    for (auto& frame : out.frames)
        for (auto& actor : frame.actors)
            for (Eigen::Index j = 0; j < actor.joints.cols(); ++j)
                for (int k = 0; k < 3; ++k) actor.joints(k, j) += dist(rng);
    return out;
}

int crop_window(int frames, double ratio) {
    ratio = std::clamp(ratio, 0.0, 1.0);
    // ceil keeps the window at least ceil(ratio * N); the slack absorbs
    // products like 0.7 * 10 = 7.000000000000001.
    const int window = static_cast<int>(std::ceil(ratio * frames - 1e-9));
    return std::clamp(window, 1, std::max(frames, 1));
}

SkeletonSequence temporal_crop(const SkeletonSequence& seq, double ratio, double start_frac) {
    const int frames = seq.frame_count();
    const int window = crop_window(frames, ratio);
    start_frac = std::clamp(start_frac, 0.0, 1.0);
    const int start = std::min(static_cast<int>(std::floor(start_frac * (frames - window))),
                               frames - window);
    SkeletonSequence out;
    out.label = seq.label;
    out.source_id = seq.source_id;
    out.frames.assign(seq.frames.begin() + start, seq.frames.begin() + start + window);
    return out;
}

Dataset expand(const Dataset& dataset, const AugmentationSpec& spec) {
    spec.validate();
    if (dataset.split != Split::Train)
        throw ConfigError("augmentation is only applied to the training split");
    Dataset out;
    out.split = dataset.split;
    out.sequences.reserve(dataset.sequences.size() * (1 + spec.multiplicity));
    for (std::size_t i = 0; i < dataset.sequences.size(); ++i) {
        const auto& seq = dataset.sequences[i];
        out.sequences.push_back(seq);
        for (int c = 1; c <= spec.multiplicity; ++c) {
            auto rng = seeded_rng({spec.seed, i, static_cast<std::uint64_t>(c)});
            std::uniform_real_distribution<double> angle(-spec.rotation_deg, spec.rotation_deg);
            std::uniform_real_distribution<double> crop(spec.crop_min, spec.crop_max);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const Eigen::Vector3d angles(angle(rng), angle(rng), angle(rng));
            const double ratio = crop(rng);
            const double start = unit(rng);
            const std::uint64_t noise_seed = rng();
            auto copy = temporal_crop(
                add_noise(rotate(seq, angles), spec.noise_mean, spec.noise_sigma, noise_seed),
                ratio, start);
            copy.source_id = seq.source_id + "_aug" + std::to_string(c);
            out.sequences.push_back(std::move(copy));
        }
    }
    return out;
}

}  // namespace actionimg
