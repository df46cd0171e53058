#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace actionimg {

struct BodyPart {
    std::string name;
    std::vector<int> joints;  // 0-based raw joint indices, in chain order
};

/// Row order of an action image: body parts concatenated, joints within a
/// part ordered along their physical connections.
class BodyPartLayout {
public:
    /// Throws ConfigError unless the concatenated parts form a bijection on
    /// {0..J-1}.
    explicit BodyPartLayout(std::vector<BodyPart> parts);

    /// Kinect v2 / NTU 25-joint skeleton.
    static BodyPartLayout kinect25();
    /// Kinect v1 / UTD-MHAD 20-joint skeleton.
    static BodyPartLayout utd20();
    static BodyPartLayout identity(int joint_count);
    /// Built-in layout for 20 or 25 joints; ConfigError otherwise.
    static BodyPartLayout builtin_for(int joint_count);

    /// `{"parts": [{"name": str, "joints": [1-based ints]}]}`
    static BodyPartLayout from_json(const std::string& text);
    static BodyPartLayout load(const std::filesystem::path& path);
    std::string to_json() const;

    /// Resolves "kinect25", "utd20", "identity" or a file path.
    static BodyPartLayout resolve(const std::string& name_or_path, int joint_count);

    const std::vector<BodyPart>& parts() const { return parts_; }
    /// permutation()[row] is the raw joint index placed at that row.
    const std::vector<int>& permutation() const { return permutation_; }
    int joint_count() const { return static_cast<int>(permutation_.size()); }

    BodyPartLayout inverse() const;

private:
    std::vector<BodyPart> parts_;
    std::vector<int> permutation_;
};

}  // namespace actionimg
