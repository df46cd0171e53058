#include <algorithm>
#include <cmath>
#include <numbers>

#include "actionimg/errors.hpp"
#include "actionimg/ingest.hpp"
#include "actionimg/layout.hpp"
#include "actionimg/rng.hpp"

namespace actionimg {

namespace {

constexpr std::uint64_t kClassStream = 0xC1A55;
constexpr std::uint64_t kInstanceStream = 0x1257;
constexpr std::uint64_t kTransformStream = 0x7F0;
constexpr std::uint64_t kSplitStream = 0x5B1;

struct ChainPosition {
    int part = 0;
    int depth = 0;
};

// Part membership and depth along the chain for every raw joint index.
std::vector<ChainPosition> chain_positions(int joint_count) {
    std::vector<ChainPosition> pos(joint_count);
    if (joint_count == 20 || joint_count == 25) {
        const auto layout = BodyPartLayout::builtin_for(joint_count);
        for (std::size_t p = 0; p < layout.parts().size(); ++p) {
            const auto& joints = layout.parts()[p].joints;
            for (std::size_t d = 0; d < joints.size(); ++d)
                pos[joints[d]] = {static_cast<int>(p), static_cast<int>(d)};
        }
        return pos;
    }
    const int parts = std::min(5, joint_count);
    for (int j = 0; j < joint_count; ++j) {
        const int p = j * parts / joint_count;
        const int first = (p * joint_count + parts - 1) / parts;
        pos[j] = {p, j - first};
    }
    return pos;
}

struct ClassSignature {
    double base_frequency = 1.0;  // cycles per sequence
    int components = 2;
    Eigen::Matrix<double, 5, 3> amplitude;
    Eigen::Matrix<double, 5, 3> phase;
};

ClassSignature class_signature(const SynthSpec& spec, int label) {
    auto rng = seeded_rng({spec.seed, kClassStream, static_cast<std::uint64_t>(label)});
    std::uniform_real_distribution<double> amp(0.3, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    ClassSignature sig;
    sig.base_frequency = 1.0 + label;
    sig.components = 2 + label % 2;
    for (int p = 0; p < 5; ++p)
        for (int k = 0; k < 3; ++k) {
            sig.amplitude(p, k) = amp(rng);
            sig.phase(p, k) = phase(rng);
        }
    return sig;
}

// Direction in which each part's chain extends from the body center.
const Eigen::Matrix<double, 5, 3>& part_directions() {
    static const Eigen::Matrix<double, 5, 3> dirs = [] {
        Eigen::Matrix<double, 5, 3> d;
        d << -1.0, 0.3, 0.0,
              1.0, 0.3, 0.0,
              0.0, 1.0, 0.1,
             -0.3, -1.0, 0.0,
              0.3, -1.0, 0.0;
        return d;
    }();
    return dirs;
}

}  // namespace

void SynthSpec::validate() const {
    if (class_count < 2) throw ConfigError("synth: class_count must be >= 2");
    if (sequences_per_class < 1) throw ConfigError("synth: sequences_per_class must be >= 1");
    if (test_per_class < 0 || test_per_class > sequences_per_class)
        throw ConfigError("synth: test_per_class must lie in [0, sequences_per_class]");
    if (joint_count < 1) throw ConfigError("synth: joint_count must be >= 1");
    if (frames_min < 8 || frames_max < frames_min)
        throw ConfigError("synth: need 8 <= frames_min <= frames_max");
    if (noise < 0.0) throw ConfigError("synth: noise must be >= 0");
    if (motion_amplitude < 0.0) throw ConfigError("synth: motion_amplitude must be >= 0");
    if (translation_max < 0.0) throw ConfigError("synth: translation_max must be >= 0");
    if (!(scale_min > 0.0) || scale_max < scale_min)
        throw ConfigError("synth: need 0 < scale_min <= scale_max");
}

SkeletonSequence synth_motion(const SynthSpec& spec, int label, int instance) {
    spec.validate();
    if (label < 0 || label >= spec.class_count) throw ConfigError("synth: label out of range");
    const auto sig = class_signature(spec, label);
    const auto chains = chain_positions(spec.joint_count);
    auto rng = seeded_rng({spec.seed, kInstanceStream, static_cast<std::uint64_t>(label),
                           static_cast<std::uint64_t>(instance)});
    std::uniform_int_distribution<int> frames_dist(spec.frames_min, spec.frames_max);
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    std::uniform_real_distribution<double> gain(0.85, 1.15);
    std::normal_distribution<double> noise(0.0, 1.0);

    const int frames = frames_dist(rng);
    const double phase_shift = jitter(rng);
    const double amp_gain = gain(rng);
    const double two_pi = 2.0 * std::numbers::pi;
    const double bone = 0.25;
    const double motion = spec.motion_amplitude;

    std::vector<JointMatrix> out;
    out.reserve(frames);
    for (int n = 0; n < frames; ++n) {
        const double t = static_cast<double>(n) / frames;
        JointMatrix joints(3, spec.joint_count);
        for (int j = 0; j < spec.joint_count; ++j) {
            const auto [part, depth] = chains[j];
            const double decay = 1.0 / (1.0 + 0.35 * depth);
            for (int k = 0; k < 3; ++k) {
                double v = bone * (depth + 1) * part_directions()(part, k);
                double a = motion * amp_gain * decay * sig.amplitude(part, k);
                for (int q = 0; q < sig.components; ++q) {
                    const double f = sig.base_frequency * (q + 1);
                    v += a * std::sin(two_pi * f * t + sig.phase(part, k) + 0.4 * depth +
                                      phase_shift);
                    a *= 0.5;
                }
                joints(k, j) = v + spec.noise * noise(rng);
            }
        }
        out.push_back(std::move(joints));
    }
    return make_sequence(std::move(out), label,
                         "c" + std::to_string(label) + "_s" + std::to_string(instance));
}

SynthDataset generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    SynthDataset ds;
    for (int c = 0; c < spec.class_count; ++c) ds.manifest.class_names.push_back("class_" + std::to_string(c));

    for (int c = 0; c < spec.class_count; ++c) {
        std::vector<int> order(spec.sequences_per_class);
        for (int i = 0; i < spec.sequences_per_class; ++i) order[i] = i;
        auto split_rng = seeded_rng({spec.seed, kSplitStream, static_cast<std::uint64_t>(c)});
        std::shuffle(order.begin(), order.end(), split_rng);
        std::vector<bool> is_test(spec.sequences_per_class, false);
        for (int i = 0; i < spec.test_per_class; ++i) is_test[order[i]] = true;

        for (int i = 0; i < spec.sequences_per_class; ++i) {
            auto rng = seeded_rng({spec.seed, kTransformStream, static_cast<std::uint64_t>(c),
                                   static_cast<std::uint64_t>(i)});
            std::uniform_real_distribution<double> scale(spec.scale_min, spec.scale_max);
            std::uniform_real_distribution<double> shift(-spec.translation_max, spec.translation_max);
            const double s = scale(rng);
            const Joint3D t(shift(rng), shift(rng), shift(rng));
            auto seq = apply_similarity(synth_motion(spec, c, i), s, t);
            ds.manifest.entries.push_back(ManifestEntry{seq.source_id + ".jsonl", c,
                                                        is_test[i] ? Split::Test : Split::Train});
            ds.sequences.push_back(std::move(seq));
        }
    }
    return ds;
}

}  // namespace actionimg
