#include "actionimg/skeleton.hpp"

#include <algorithm>

#include "actionimg/errors.hpp"
#include "actionimg/layout.hpp"

namespace actionimg {

int SkeletonSequence::actor_count() const {
    return frames.empty() ? 0 : static_cast<int>(frames.front().actors.size());
}

int SkeletonSequence::joint_count() const {
    if (frames.empty() || frames.front().actors.empty()) return 0;
    return static_cast<int>(frames.front().actors.front().joints.cols());
}

void check_invariants(const SkeletonSequence& seq) {
    if (seq.frames.empty()) throw DataError("sequence '" + seq.source_id + "' has no frames");
    const int actors = seq.actor_count();
    const int joints = seq.joint_count();
    if (actors < 1) throw DataError("sequence '" + seq.source_id + "' has no actors");
    if (joints < 1) throw DataError("sequence '" + seq.source_id + "' has no joints");
    const auto& first = seq.frames.front();
    for (std::size_t n = 0; n < seq.frames.size(); ++n) {
        const auto& frame = seq.frames[n];
        if (static_cast<int>(frame.actors.size()) != actors)
            throw DataError("frame " + std::to_string(n) + ": expected " + std::to_string(actors) +
                            " actors, got " + std::to_string(frame.actors.size()));
        for (int a = 0; a < actors; ++a) {
            const auto& actor = frame.actors[a];
            if (actor.joints.cols() != joints)
                throw DataError("frame " + std::to_string(n) + ": expected " +
                                std::to_string(joints) + " joints, got " +
                                std::to_string(actor.joints.cols()));
            if (actor.id != first.actors[a].id)
                throw DataError("frame " + std::to_string(n) + ": actor order changed");
            if (!actor.joints.allFinite())
                throw DataError("frame " + std::to_string(n) + ": non-finite coordinate");
        }
    }
}

SkeletonSequence make_sequence(std::vector<JointMatrix> frames, std::optional<int> label,
                               std::string source_id) {
    SkeletonSequence seq;
    seq.label = label;
    seq.source_id = std::move(source_id);
    seq.frames.reserve(frames.size());
    for (auto& joints : frames) {
        SkeletonFrame frame;
        frame.actors.push_back(Actor{0, std::move(joints)});
        seq.frames.push_back(std::move(frame));
    }
    return seq;
}

ChannelMask ChannelMask::parse(const std::string& text) {
    ChannelMask mask{false, false, false};
    for (char c : text) {
        switch (c) {
            case 'x': case 'X': mask.keep_x = true; break;
            case 'y': case 'Y': mask.keep_y = true; break;
            case 'z': case 'Z': mask.keep_z = true; break;
            case '-': break;
            default: throw ConfigError("invalid channel mask '" + text + "'");
        }
    }
    if (!mask.any()) throw ConfigError("channel mask must keep at least one channel");
    return mask;
}

std::string ChannelMask::to_string() const {
    std::string s;
    if (keep_x) s += 'x';
    if (keep_y) s += 'y';
    if (keep_z) s += 'z';
    return s;
}

SkeletonSequence reorder_joints(const SkeletonSequence& seq, const BodyPartLayout& layout) {
    const auto& perm = layout.permutation();
    if (layout.joint_count() != seq.joint_count())
        throw ConfigError("layout covers " + std::to_string(layout.joint_count()) +
                          " joints but sequence has " + std::to_string(seq.joint_count()));
    SkeletonSequence out = seq;
    for (auto& frame : out.frames) {
        for (auto& actor : frame.actors) {
            JointMatrix reordered(3, actor.joints.cols());
            for (std::size_t row = 0; row < perm.size(); ++row)
                reordered.col(static_cast<Eigen::Index>(row)) = actor.joints.col(perm[row]);
            actor.joints = std::move(reordered);
        }
    }
    return out;
}

SkeletonSequence merge_actors(const SkeletonSequence& seq) {
    const int actors = seq.actor_count();
    if (actors > 2)
        throw DataError("merge_actors supports at most 2 actors, got " + std::to_string(actors));
    if (actors <= 1) return seq;
    const Eigen::Index joints = seq.joint_count();
    SkeletonSequence out;
    out.label = seq.label;
    out.source_id = seq.source_id;
    out.frames.reserve(seq.frames.size());
    for (const auto& frame : seq.frames) {
        Actor merged{frame.actors[0].id, JointMatrix(3, 2 * joints)};
        merged.joints.leftCols(joints) = frame.actors[0].joints;
        merged.joints.rightCols(joints) = frame.actors[1].joints;
        out.frames.push_back(SkeletonFrame{{std::move(merged)}});
    }
    return out;
}

SkeletonSequence split_actors(const SkeletonSequence& merged, int actor_count,
                              const std::vector<std::uint64_t>& actor_ids) {
    if (merged.actor_count() != 1) throw ConfigError("split_actors expects a merged sequence");
    if (actor_count < 1 || merged.joint_count() % actor_count != 0)
        throw ConfigError("cannot split " + std::to_string(merged.joint_count()) +
                          " joints into " + std::to_string(actor_count) + " actors");
    const Eigen::Index joints = merged.joint_count() / actor_count;
    SkeletonSequence out;
    out.label = merged.label;
    out.source_id = merged.source_id;
    for (const auto& frame : merged.frames) {
        SkeletonFrame split;
        for (int a = 0; a < actor_count; ++a) {
            std::uint64_t id = a < static_cast<int>(actor_ids.size())
                                   ? actor_ids[a]
                                   : (a == 0 ? frame.actors[0].id : static_cast<std::uint64_t>(a));
            split.actors.push_back(Actor{id, frame.actors[0].joints.middleCols(a * joints, joints)});
        }
        out.frames.push_back(std::move(split));
    }
    return out;
}

SkeletonSequence mask_channels(const SkeletonSequence& seq, const ChannelMask& mask) {
    if (!mask.any()) throw ConfigError("channel mask must keep at least one channel");
    SkeletonSequence out = seq;
    const bool keep[3] = {mask.keep_x, mask.keep_y, mask.keep_z};
    for (auto& frame : out.frames)
        for (auto& actor : frame.actors)
            for (int k = 0; k < 3; ++k)
                if (!keep[k]) actor.joints.row(k).setZero();
    return out;
}

SkeletonSequence apply_similarity(const SkeletonSequence& seq, double scale,
                                  const Joint3D& translation) {
    SkeletonSequence out = seq;
    for (auto& frame : out.frames)
        for (auto& actor : frame.actors)
            actor.joints = (scale * actor.joints).colwise() + translation;
    return out;
}

bool operator==(const SkeletonFrame& a, const SkeletonFrame& b) {
    if (a.actors.size() != b.actors.size()) return false;
    for (std::size_t k = 0; k < a.actors.size(); ++k) {
        const auto& x = a.actors[k];
        const auto& y = b.actors[k];
        if (x.id != y.id || x.joints.cols() != y.joints.cols() || x.joints != y.joints) return false;
    }
    return true;
}

bool operator==(const SkeletonSequence& a, const SkeletonSequence& b) {
    return a.label == b.label && a.source_id == b.source_id && a.frames == b.frames;
}

}  // namespace actionimg
