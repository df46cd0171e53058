#pragma once

#include <random>

#include "actionimg/skeleton.hpp"

namespace actionimg::testing {

inline SkeletonSequence random_sequence(std::mt19937_64& rng, int frames, int joints, int actors = 1,
                                        double spread = 1.0) {
    std::uniform_real_distribution<double> coord(-spread, spread);
    SkeletonSequence seq;
    seq.label = 0;
    seq.source_id = "random";
    for (int n = 0; n < frames; ++n) {
        SkeletonFrame frame;
        for (int a = 0; a < actors; ++a) {
            JointMatrix m(3, joints);
            for (int j = 0; j < joints; ++j)
                for (int k = 0; k < 3; ++k) m(k, j) = coord(rng);
            frame.actors.push_back(Actor{static_cast<std::uint64_t>(a + 1), m});
        }
        seq.frames.push_back(std::move(frame));
    }
    return seq;
}

}  // namespace actionimg::testing
