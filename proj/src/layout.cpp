#include "actionimg/layout.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "actionimg/errors.hpp"

namespace actionimg {

namespace {

BodyPartLayout from_one_based(std::vector<std::pair<std::string, std::vector<int>>> parts) {
    std::vector<BodyPart> out;
    for (auto& [name, joints] : parts) {
        for (int& j : joints) --j;
        out.push_back(BodyPart{std::move(name), std::move(joints)});
    }
    return BodyPartLayout(std::move(out));
}

}  // namespace

BodyPartLayout::BodyPartLayout(std::vector<BodyPart> parts) : parts_(std::move(parts)) {
    for (const auto& part : parts_)
        permutation_.insert(permutation_.end(), part.joints.begin(), part.joints.end());
    const int count = joint_count();
    if (count == 0) throw ConfigError("layout has no joints");
    std::vector<bool> seen(count, false);
    for (int j : permutation_) {
        if (j < 0 || j >= count)
            throw ConfigError("layout joint index " + std::to_string(j + 1) + " outside 1.." +
                              std::to_string(count));
        if (seen[j]) throw ConfigError("layout lists joint " + std::to_string(j + 1) + " twice");
        seen[j] = true;
    }
}

// Kinect v2 numbering (1-based): 1 spine base, 2 spine mid, 3 neck, 4 head,
// 5-8 left shoulder/elbow/wrist/hand, 9-12 right arm, 13-16 left hip/knee/
// ankle/foot, 17-20 right leg, 21 spine shoulder, 22/23 left hand tip/thumb,
// 24/25 right hand tip/thumb.
BodyPartLayout BodyPartLayout::kinect25() {
    return from_one_based({
        {"left_arm", {5, 6, 7, 8, 22, 23}},
        {"right_arm", {9, 10, 11, 12, 24, 25}},
        {"trunk", {4, 3, 21, 2, 1}},
        {"left_leg", {13, 14, 15, 16}},
        {"right_leg", {17, 18, 19, 20}},
    });
}

// Kinect v1 numbering (1-based): 1 head, 2 shoulder center, 3 spine, 4 hip
// center, then arms and legs in groups of four.
BodyPartLayout BodyPartLayout::utd20() {
    return from_one_based({
        {"left_arm", {5, 6, 7, 8}},
        {"right_arm", {9, 10, 11, 12}},
        {"trunk", {1, 2, 3, 4}},
        {"left_leg", {13, 14, 15, 16}},
        {"right_leg", {17, 18, 19, 20}},
    });
}

BodyPartLayout BodyPartLayout::identity(int joint_count) {
    if (joint_count < 1) throw ConfigError("identity layout needs at least one joint");
    BodyPart all{"all", {}};
    for (int j = 0; j < joint_count; ++j) all.joints.push_back(j);
    return BodyPartLayout({std::move(all)});
}

BodyPartLayout BodyPartLayout::builtin_for(int joint_count) {
    if (joint_count == 25) return kinect25();
    if (joint_count == 20) return utd20();
    throw ConfigError("no built-in layout for " + std::to_string(joint_count) +
                      " joints; supply a layout file");
}

BodyPartLayout BodyPartLayout::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("layout: ") + e.what());
    }
    if (!doc.contains("parts") || !doc["parts"].is_array())
        throw ConfigError("layout: missing \"parts\" array");
    std::vector<std::pair<std::string, std::vector<int>>> parts;
    for (const auto& part : doc["parts"]) {
        try {
            parts.emplace_back(part.at("name").get<std::string>(),
                               part.at("joints").get<std::vector<int>>());
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("layout part: ") + e.what());
        }
    }
    return from_one_based(std::move(parts));
}

BodyPartLayout BodyPartLayout::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open layout file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

std::string BodyPartLayout::to_json() const {
    nlohmann::json doc;
    doc["parts"] = nlohmann::json::array();
    for (const auto& part : parts_) {
        std::vector<int> one_based;
        for (int j : part.joints) one_based.push_back(j + 1);
        doc["parts"].push_back({{"name", part.name}, {"joints", one_based}});
    }
    return doc.dump(2);
}

BodyPartLayout BodyPartLayout::resolve(const std::string& name_or_path, int joint_count) {
    if (name_or_path.empty() || name_or_path == "default") return builtin_for(joint_count);
    if (name_or_path == "kinect25") return kinect25();
    if (name_or_path == "utd20") return utd20();
    if (name_or_path == "identity") return identity(joint_count);
    return load(name_or_path);
}

BodyPartLayout BodyPartLayout::inverse() const {
    BodyPart part{"inverse", std::vector<int>(permutation_.size())};
    for (std::size_t row = 0; row < permutation_.size(); ++row)
        part.joints[permutation_[row]] = static_cast<int>(row);
    return BodyPartLayout({std::move(part)});
}

}  // namespace actionimg
