#include "actionimg/mapping.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "actionimg/errors.hpp"

namespace actionimg {

namespace {

// Dividing first keeps the range endpoint at exactly 255.
std::uint8_t quantize(double offset, double range) {
    const double v = std::floor(255.0 * (offset / range));
    return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

void require_single_stream(const SkeletonSequence& seq) {
    if (seq.frames.empty()) throw DataError("cannot encode an empty sequence");
    if (seq.actor_count() != 1)
        throw ConfigError("encode expects a merged single-actor stream, got " +
                          std::to_string(seq.actor_count()) + " actors");
}

}  // namespace

EncodedImage encode_proposed(const SkeletonSequence& seq) {
    require_single_stream(seq);
    const int joints = seq.joint_count();
    const int frames = seq.frame_count();

    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d hi = -lo;
    for (const auto& frame : seq.frames) {
        const auto& m = frame.actors[0].joints;
        lo = lo.cwiseMin(m.rowwise().minCoeff());
        hi = hi.cwiseMax(m.rowwise().maxCoeff());
    }
    const double range = (hi - lo).maxCoeff();

    EncodedImage out{ActionImage(joints, frames), false};
    if (!(range >= kDegenerateRange)) {
        out.degenerate = true;
        return out;
    }
    for (int n = 0; n < frames; ++n) {
        const auto& m = seq.frames[n].actors[0].joints;
        for (int j = 0; j < joints; ++j)
            for (int k = 0; k < 3; ++k)
                out.image(j, n, k) = quantize(m(k, j) - lo[k], range);
    }
    return out;
}

EncodedImage encode_baseline(const SkeletonSequence& seq, const GlobalStats& stats) {
    require_single_stream(seq);
    if (!(stats.c_max > stats.c_min))
        throw ConfigError("baseline mapping needs c_max > c_min");
    const int joints = seq.joint_count();
    const int frames = seq.frame_count();
    const double range = stats.c_max - stats.c_min;
    EncodedImage out{ActionImage(joints, frames), false};
    for (int n = 0; n < frames; ++n) {
        const auto& m = seq.frames[n].actors[0].joints;
        for (int j = 0; j < joints; ++j)
            for (int k = 0; k < 3; ++k) {
                const double c = std::clamp(m(k, j), stats.c_min, stats.c_max);
                out.image(j, n, k) = quantize(c - stats.c_min, range);
            }
    }
    return out;
}

GlobalStats compute_global_stats(std::span<const SkeletonSequence> training) {
    if (training.empty()) throw DataError("global stats need a nonempty training set");
    GlobalStats stats{std::numeric_limits<double>::infinity(),
                      -std::numeric_limits<double>::infinity()};
    for (const auto& seq : training)
        for (const auto& frame : seq.frames)
            for (const auto& actor : frame.actors) {
                if (actor.joints.size() == 0) continue;
                stats.c_min = std::min(stats.c_min, actor.joints.minCoeff());
                stats.c_max = std::max(stats.c_max, actor.joints.maxCoeff());
            }
    if (!(stats.c_min <= stats.c_max)) throw DataError("global stats: training set has no joints");
    return stats;
}

EncodedImage MappingMode::encode(const SkeletonSequence& seq) const {
    if (kind == MappingKind::Proposed) return encode_proposed(seq);
    if (!stats) throw ConfigError("baseline mapping requires global stats; run `stats` first");
    return encode_baseline(seq, *stats);
}

std::string GlobalStats::to_json() const {
    return nlohmann::json{{"c_min", c_min}, {"c_max", c_max}}.dump(2);
}

GlobalStats GlobalStats::from_json(const std::string& text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        GlobalStats s{doc.at("c_min").get<double>(), doc.at("c_max").get<double>()};
        if (!(s.c_min <= s.c_max)) throw ConfigError("stats: c_min > c_max");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("stats: ") + e.what());
    }
}

GlobalStats GlobalStats::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open stats file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

void GlobalStats::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << to_json() << '\n';
}

}  // namespace actionimg
