#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "actionimg/skeleton.hpp"

namespace actionimg {

enum class Split { Train, Test };

std::string to_string(Split split);
Split parse_split(const std::string& text);

struct ManifestEntry {
    std::string path;
    int label = 0;
    Split split = Split::Train;
};

/// Labeled file list with train/test assignment. Relative paths resolve
/// against the manifest's directory.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::vector<std::string> class_names;

    int class_count() const { return static_cast<int>(class_names.size()); }
    /// Labels in range, paths unique.
    void validate() const;

    std::string to_json() const;
    static DatasetManifest from_json(const std::string& text);
    static DatasetManifest load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

/// In-memory sequences sharing one split.
struct Dataset {
    std::vector<SkeletonSequence> sequences;
    Split split = Split::Train;
};

struct ParseResult {
    SkeletonSequence sequence;
    std::vector<std::string> warnings;
};

/// NTU RGB+D `.skeleton` text: frame count, then per frame a body count and
/// per body a 10-value metadata line, a joint count (25) and 25 lines of 12
/// values of which only x y z are kept. Bodies are matched across frames by
/// id; with more than two, the two with the largest motion energy are kept.
ParseResult parse_ntu_skeleton(std::istream& in, std::string source_id = {});
ParseResult parse_ntu_skeleton_file(const std::filesystem::path& path);

/// JSON lines: header `{"label": int?, "joints": J, "actors": A}`, then one
/// `{"actors": [[[x,y,z] x J] x A]}` object per frame.
SkeletonSequence parse_jsonl(std::istream& in, std::string source_id = {});
void write_jsonl(std::ostream& out, const SkeletonSequence& seq);

/// Dispatches on extension: `.skeleton` -> NTU, otherwise JSON lines.
ParseResult load_sequence(const std::filesystem::path& path);

/// Class-separable sinusoidal skeleton motion for desk-scale experiments.
struct SynthSpec {
    int class_count = 5;
    int sequences_per_class = 90;
    /// Per-class count assigned to the test split (stratified).
    int test_per_class = 30;
    int joint_count = 25;
    int frames_min = 40;
    int frames_max = 80;
    double noise = 0.005;
    /// Peak limb swing; bones are 0.25 long.
    double motion_amplitude = 0.6;
    double translation_max = 100.0;
    double scale_min = 0.5;
    double scale_max = 2.0;
    std::uint64_t seed = 7;

    void validate() const;
};

struct SynthDataset {
    DatasetManifest manifest;
    std::vector<SkeletonSequence> sequences;  // parallel to manifest.entries
};

/// Untransformed motion for one (class, instance) pair, including base noise.
SkeletonSequence synth_motion(const SynthSpec& spec, int label, int instance);

/// Whole dataset: synth_motion plus a random global scale and translation per
/// sequence. Pure function of `spec`.
SynthDataset generate_synthetic(const SynthSpec& spec);

}  // namespace actionimg
