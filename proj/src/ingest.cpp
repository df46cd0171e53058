#include "actionimg/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "actionimg/errors.hpp"

namespace actionimg {

using nlohmann::json;

std::string to_string(Split split) { return split == Split::Train ? "train" : "test"; }

Split parse_split(const std::string& text) {
    if (text == "train") return Split::Train;
    if (text == "test") return Split::Test;
    throw ConfigError("unknown split '" + text + "' (expected train or test)");
}

// ---------------------------------------------------------------- manifest

void DatasetManifest::validate() const {
    if (class_names.empty()) throw ConfigError("manifest has no class names");
    std::set<std::string> paths;
    for (const auto& e : entries) {
        if (e.label < 0 || e.label >= class_count())
            throw ConfigError("manifest entry '" + e.path + "' has label " +
                              std::to_string(e.label) + " outside [0, " +
                              std::to_string(class_count()) + ")");
        if (!paths.insert(e.path).second)
            throw ConfigError("manifest lists '" + e.path + "' twice");
    }
}

std::string DatasetManifest::to_json() const {
    json doc;
    doc["class_names"] = class_names;
    doc["entries"] = json::array();
    for (const auto& e : entries)
        doc["entries"].push_back({{"path", e.path}, {"label", e.label}, {"split", to_string(e.split)}});
    return doc.dump(2);
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
    DatasetManifest m;
    try {
        const json doc = json::parse(text);
        m.class_names = doc.at("class_names").get<std::vector<std::string>>();
        for (const auto& e : doc.at("entries")) {
            m.entries.push_back(ManifestEntry{e.at("path").get<std::string>(),
                                              e.at("label").get<int>(),
                                              parse_split(e.value("split", "train"))});
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest: ") + e.what());
    }
    m.validate();
    return m;
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

void DatasetManifest::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest " + path.string());
    out << to_json() << '\n';
}

// ---------------------------------------------------------------- NTU text

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    /// Next non-blank line split on whitespace; ParseError naming `expect`
    /// at end of input.
    std::vector<std::string_view> next(const std::string& expect) {
        while (std::getline(in_, line_)) {
            ++line_no_;
            split();
            if (!tokens_.empty()) return tokens_;
        }
        throw ParseError(line_no_ + 1, "unexpected end of file, expected " + expect);
    }

    bool at_end() {
        while (std::getline(in_, line_)) {
            ++line_no_;
            split();
            if (!tokens_.empty()) return false;
        }
        return true;
    }

    std::size_t line() const { return line_no_; }

private:
    void split() {
        tokens_.clear();
        std::size_t i = 0;
        while (i < line_.size()) {
            while (i < line_.size() && std::isspace(static_cast<unsigned char>(line_[i]))) ++i;
            std::size_t start = i;
            while (i < line_.size() && !std::isspace(static_cast<unsigned char>(line_[i]))) ++i;
            if (i > start) tokens_.emplace_back(line_.data() + start, i - start);
        }
    }

    std::istream& in_;
    std::string line_;
    std::vector<std::string_view> tokens_;
    std::size_t line_no_ = 0;
};

double to_double(std::string_view tok, std::size_t line) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(line, "non-numeric token '" + std::string(tok) + "'");
    if (!std::isfinite(value)) throw ParseError(line, "non-finite coordinate");
    return value;
}

template <typename Int>
Int to_int(std::string_view tok, std::size_t line) {
    Int value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(line, "expected integer, got '" + std::string(tok) + "'");
    return value;
}

void expect_count(const std::vector<std::string_view>& tokens, std::size_t count,
                  const std::string& what, std::size_t line) {
    if (tokens.size() != count)
        throw ParseError(line, what + ": expected " + std::to_string(count) + " values, got " +
                                   std::to_string(tokens.size()));
}

constexpr int kNtuJoints = 25;

}  // namespace

ParseResult parse_ntu_skeleton(std::istream& in, std::string source_id) {
    LineReader reader(in);
    auto tokens = reader.next("frame count");
    expect_count(tokens, 1, "frame count", reader.line());
    const int frame_count = to_int<int>(tokens[0], reader.line());
    if (frame_count < 1) throw ParseError(reader.line(), "frame count must be >= 1");

    using BodyMap = std::map<std::uint64_t, JointMatrix>;
    std::vector<BodyMap> frames(frame_count);
    std::vector<std::uint64_t> order;  // first appearance

    for (int f = 0; f < frame_count; ++f) {
        const std::string where = "frame " + std::to_string(f + 1) + " of " +
                                  std::to_string(frame_count);
        tokens = reader.next("body count for " + where);
        expect_count(tokens, 1, "body count", reader.line());
        const int bodies = to_int<int>(tokens[0], reader.line());
        if (bodies < 0) throw ParseError(reader.line(), "negative body count");
        for (int b = 0; b < bodies; ++b) {
            tokens = reader.next("body metadata for " + where);
            expect_count(tokens, 10, "body metadata", reader.line());
            const auto id = to_int<std::uint64_t>(tokens[0], reader.line());
            for (std::size_t t = 1; t < tokens.size(); ++t) to_double(tokens[t], reader.line());

            tokens = reader.next("joint count for " + where);
            expect_count(tokens, 1, "joint count", reader.line());
            const int joints = to_int<int>(tokens[0], reader.line());
            if (joints != kNtuJoints)
                throw ParseError(reader.line(), "joint count must be 25, got " +
                                                    std::to_string(joints));
            JointMatrix coords(3, kNtuJoints);
            for (int j = 0; j < kNtuJoints; ++j) {
                tokens = reader.next("joint " + std::to_string(j + 1) + " for " + where);
                expect_count(tokens, 12, "joint record", reader.line());
                for (int k = 0; k < 3; ++k) coords(k, j) = to_double(tokens[k], reader.line());
                for (std::size_t t = 3; t < tokens.size(); ++t) to_double(tokens[t], reader.line());
            }
            if (frames[f].count(id))
                throw ParseError(reader.line(), "body id " + std::to_string(id) +
                                                    " repeated within one frame");
            if (std::find(order.begin(), order.end(), id) == order.end()) order.push_back(id);
            frames[f].emplace(id, std::move(coords));
        }
    }
    if (!reader.at_end())
        throw ParseError(reader.line(), "frame-count mismatch: data beyond the declared " +
                                            std::to_string(frame_count) + " frames");
    if (order.empty()) throw DataError("no bodies in '" + source_id + "'");

    ParseResult result;
    std::vector<std::uint64_t> kept = order;
    if (order.size() > 2) {
        std::vector<double> energy(order.size(), 0.0);
        for (std::size_t i = 0; i < order.size(); ++i) {
            const JointMatrix* prev = nullptr;
            for (const auto& frame : frames) {
                auto it = frame.find(order[i]);
                if (it == frame.end()) {
                    prev = nullptr;
                    continue;
                }
                if (prev) energy[i] += (it->second - *prev).squaredNorm();
                prev = &it->second;
            }
        }
        std::vector<std::size_t> idx(order.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return energy[a] > energy[b]; });
        std::sort(idx.begin(), idx.begin() + 2);
        kept = {order[idx[0]], order[idx[1]]};
        result.warnings.push_back(std::to_string(order.size()) +
                                  " bodies found; kept the two with largest motion energy");
    }

    auto& seq = result.sequence;
    seq.source_id = std::move(source_id);
    seq.frames.resize(frame_count);
    for (std::uint64_t id : kept) {
        int missing = 0;
        for (int f = 0; f < frame_count; ++f) {
            auto it = frames[f].find(id);
            if (it != frames[f].end()) {
                seq.frames[f].actors.push_back(Actor{id, it->second});
            } else {
                seq.frames[f].actors.push_back(Actor{id, JointMatrix::Zero(3, kNtuJoints)});
                ++missing;
            }
        }
        if (missing > 0)
            result.warnings.push_back("body " + std::to_string(id) + " missing in " +
                                      std::to_string(missing) + " frame(s); filled with zeros");
    }
    check_invariants(seq);
    return result;
}

ParseResult parse_ntu_skeleton_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return parse_ntu_skeleton(in, path.stem().string());
    } catch (const ParseError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------- JSON lines

SkeletonSequence parse_jsonl(std::istream& in, std::string source_id) {
    std::string line;
    std::size_t line_no = 0;
    auto next_json = [&](json& out) {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                out = json::parse(line);
            } catch (const json::exception& e) {
                throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
            }
            return true;
        }
        return false;
    };

    json header;
    if (!next_json(header)) throw ParseError(1, "missing header line");
    int joints = 0;
    int actors = 0;
    std::vector<std::uint64_t> ids;
    SkeletonSequence seq;
    try {
        joints = header.at("joints").get<int>();
        actors = header.at("actors").get<int>();
        if (header.contains("label") && !header["label"].is_null())
            seq.label = header["label"].get<int>();
        if (header.contains("actor_ids"))
            ids = header["actor_ids"].get<std::vector<std::uint64_t>>();
        if (header.contains("source_id")) source_id = header["source_id"].get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(line_no, std::string("header: ") + e.what());
    }
    if (joints < 1 || actors < 1) throw ParseError(line_no, "header needs joints >= 1 and actors >= 1");
    if (ids.empty())
        for (int a = 0; a < actors; ++a) ids.push_back(static_cast<std::uint64_t>(a));
    if (static_cast<int>(ids.size()) != actors)
        throw ParseError(line_no, "actor_ids length differs from actor count");
    seq.source_id = std::move(source_id);

    json row;
    while (next_json(row)) {
        if (!row.contains("actors") || !row["actors"].is_array())
            throw ParseError(line_no, "missing \"actors\" array");
        const auto& list = row["actors"];
        if (static_cast<int>(list.size()) != actors)
            throw ParseError(line_no, "expected " + std::to_string(actors) + " actors, got " +
                                          std::to_string(list.size()));
        SkeletonFrame frame;
        for (int a = 0; a < actors; ++a) {
            const auto& jl = list[a];
            if (!jl.is_array() || static_cast<int>(jl.size()) != joints)
                throw ParseError(line_no, "expected " + std::to_string(joints) + " joints, got " +
                                              std::to_string(jl.is_array() ? jl.size() : 0));
            JointMatrix coords(3, joints);
            for (int j = 0; j < joints; ++j) {
                const auto& p = jl[j];
                if (!p.is_array() || p.size() != 3)
                    throw ParseError(line_no, "joint " + std::to_string(j) + " is not [x,y,z]");
                for (int k = 0; k < 3; ++k) {
                    if (!p[k].is_number())
                        throw ParseError(line_no, "non-numeric coordinate");
                    coords(k, j) = p[k].get<double>();
                }
            }
            if (!coords.allFinite()) throw ParseError(line_no, "non-finite coordinate");
            frame.actors.push_back(Actor{ids[a], std::move(coords)});
        }
        seq.frames.push_back(std::move(frame));
    }
    if (seq.frames.empty()) throw ParseError(line_no + 1, "no frames after header");
    return seq;
}

void write_jsonl(std::ostream& out, const SkeletonSequence& seq) {
    json header;
    header["joints"] = seq.joint_count();
    header["actors"] = seq.actor_count();
    header["label"] = seq.label ? json(*seq.label) : json(nullptr);
    if (!seq.source_id.empty()) header["source_id"] = seq.source_id;
    std::vector<std::uint64_t> ids;
    if (!seq.frames.empty())
        for (const auto& a : seq.frames.front().actors) ids.push_back(a.id);
    header["actor_ids"] = ids;
    out << header.dump() << '\n';
    for (const auto& frame : seq.frames) {
        json actors = json::array();
        for (const auto& actor : frame.actors) {
            json joints = json::array();
            for (Eigen::Index j = 0; j < actor.joints.cols(); ++j)
                joints.push_back({actor.joints(0, j), actor.joints(1, j), actor.joints(2, j)});
            actors.push_back(std::move(joints));
        }
        out << json{{"actors", std::move(actors)}}.dump() << '\n';
    }
}

ParseResult load_sequence(const std::filesystem::path& path) {
    if (path.extension() == ".skeleton") return parse_ntu_skeleton_file(path);
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        ParseResult r{parse_jsonl(in, path.stem().string()), {}};
        check_invariants(r.sequence);
        return r;
    } catch (const ParseError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace actionimg
