#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "actionimg/ingest.hpp"
#include "actionimg/skeleton.hpp"

namespace actionimg {

/// Random rotation, Gaussian coordinate noise and temporal crop, drawn
/// independently for every augmented copy.
struct AugmentationSpec {
    double rotation_deg = 30.0;  // angles drawn from [-rotation_deg, rotation_deg] per axis
    double noise_mean = 0.0;
    double noise_sigma = 0.01;
    double crop_min = 0.7;
    double crop_max = 1.0;
    int multiplicity = 2;
    std::uint64_t seed = 11;

    void validate() const;
};

inline constexpr double kMaxRotationDeg = 30.0;

/// R = Rz(az) * Ry(ay) * Rx(ax), right-handed, acting on column vectors.
Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& angles_deg);

/// Centroid of every joint of every frame and actor.
Eigen::Vector3d centroid(const SkeletonSequence& seq);

/// Rotates every joint about the sequence centroid.
SkeletonSequence rotate(const SkeletonSequence& seq, const Eigen::Matrix3d& rotation);

/// As above with angles in degrees, each restricted to [-30, 30].
SkeletonSequence rotate(const SkeletonSequence& seq, const Eigen::Vector3d& angles_deg);

SkeletonSequence add_noise(const SkeletonSequence& seq, double mean, double sigma,
                           std::uint64_t seed);

/// Frame count kept by temporal_crop for a sequence of `frames` frames.
int crop_window(int frames, double ratio);

/// Contiguous window of crop_window(N, ratio) frames starting at
/// floor(start_frac * (N - window)).
SkeletonSequence temporal_crop(const SkeletonSequence& seq, double ratio, double start_frac);

/// Original plus `multiplicity` augmented copies per sequence. Copy c of
/// sequence i draws its parameters from the stream (seed, i, c). Refuses test
/// splits.
Dataset expand(const Dataset& dataset, const AugmentationSpec& spec);

}  // namespace actionimg
