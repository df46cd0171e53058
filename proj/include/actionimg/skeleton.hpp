#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace actionimg {

using Joint3D = Eigen::Vector3d;

/// Joint coordinates of one actor in one frame, one column per joint.
using JointMatrix = Eigen::Matrix<double, 3, Eigen::Dynamic>;

struct Actor {
    std::uint64_t id = 0;
    JointMatrix joints;
};

struct SkeletonFrame {
    std::vector<Actor> actors;
};

/// Ordered frames of per-actor joints. Every frame carries the same actor
/// count and every actor the same joint count.
struct SkeletonSequence {
    std::vector<SkeletonFrame> frames;
    std::optional<int> label;
    std::string source_id;

    int frame_count() const { return static_cast<int>(frames.size()); }
    int actor_count() const;
    int joint_count() const;
};

/// Throws DataError unless `seq` has N >= 1, uniform actor/joint counts,
/// stable actor ids and finite coordinates.
void check_invariants(const SkeletonSequence& seq);

/// Builds a single-actor sequence from a list of 3xJ frame matrices.
SkeletonSequence make_sequence(std::vector<JointMatrix> frames, std::optional<int> label = {},
                               std::string source_id = {});

/// Per-channel keep flags; dropped channels are set to exactly zero.
struct ChannelMask {
    bool keep_x = true;
    bool keep_y = true;
    bool keep_z = true;

    bool any() const { return keep_x || keep_y || keep_z; }
    /// Parses strings like "xyz", "xy", "z".
    static ChannelMask parse(const std::string& text);
    std::string to_string() const;
};

class BodyPartLayout;

SkeletonSequence reorder_joints(const SkeletonSequence& seq, const BodyPartLayout& layout);

/// Concatenates the joints of a two-actor sequence into one stream, actor 0
/// first. Single-actor input passes through.
SkeletonSequence merge_actors(const SkeletonSequence& seq);

/// Inverse of merge_actors for a sequence merged from `actor_count` actors.
SkeletonSequence split_actors(const SkeletonSequence& merged, int actor_count,
                              const std::vector<std::uint64_t>& actor_ids = {});

SkeletonSequence mask_channels(const SkeletonSequence& seq, const ChannelMask& mask);

/// Adds `translation` after scaling every coordinate by `scale`.
SkeletonSequence apply_similarity(const SkeletonSequence& seq, double scale,
                                  const Joint3D& translation);

bool operator==(const SkeletonFrame& a, const SkeletonFrame& b);
bool operator==(const SkeletonSequence& a, const SkeletonSequence& b);

}  // namespace actionimg
