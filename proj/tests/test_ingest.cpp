#include <set>
#include <sstream>

#include <doctest.h>

#include "actionimg/errors.hpp"
#include "actionimg/ingest.hpp"
#include "actionimg/layout.hpp"
#include "actionimg/mapping.hpp"
#include "test_helpers.hpp"

using namespace actionimg;

namespace {

struct NtuBody {
    std::uint64_t id;
    JointMatrix joints;
};

// Writes frames in the NTU text layout; `declared` overrides the frame count.
std::string ntu_text(const std::vector<std::vector<NtuBody>>& frames, int declared = -1) {
    std::ostringstream out;
    out.precision(17);
    out << (declared < 0 ? frames.size() : std::size_t(declared)) << "\n";
    for (const auto& bodies : frames) {
        out << bodies.size() << "\n";
        for (const auto& body : bodies) {
            out << body.id << " 0 1 1 1 1 0 0.1 0.2 2\n";
            out << body.joints.cols() << "\n";
            for (Eigen::Index j = 0; j < body.joints.cols(); ++j)
                out << body.joints(0, j) << " " << body.joints(1, j) << " " << body.joints(2, j)
                    << " 250.5 200.1 1000.2 500.3 0.9 0.1 0.2 0.3 2\n";
        }
    }
    return out.str();
}

JointMatrix pattern(double base, int joints = 25) {
    JointMatrix m(3, joints);
    for (int j = 0; j < joints; ++j) m.col(j) << base + j, base - 0.5 * j, base + 0.25 * j;
    return m;
}

ParseResult parse_ntu(const std::string& text) {
    std::istringstream in(text);
    return parse_ntu_skeleton(in, "fixture");
}

}  // namespace

TEST_CASE("NTU parser: minimal one-frame file") {
    const auto m = pattern(0.1);
    const auto r = parse_ntu(ntu_text({{{72057594037931101ull, m}}}));
    CHECK(r.sequence.frame_count() == 1);
    CHECK(r.sequence.actor_count() == 1);
    CHECK(r.sequence.joint_count() == 25);
    CHECK(r.sequence.frames[0].actors[0].joints == m);
    CHECK(r.sequence.frames[0].actors[0].id == 72057594037931101ull);
    CHECK(r.warnings.empty());
}

TEST_CASE("NTU parser: truncation and malformed input report the line") {
    const auto m = pattern(0.0);
    SUBCASE("declared two frames, one present") {
        try {
            parse_ntu(ntu_text({{{1, m}}}, 2));
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            // frame 1 spans lines 2..29, so the missing body count is line 30
            CHECK(e.line() == 30);
        }
    }
    SUBCASE("non-numeric token") {
        auto text = ntu_text({{{1, m}}});
        text.replace(text.find("250.5"), 5, "abcde");
        CHECK_THROWS_AS(parse_ntu(text), ParseError);
    }
    SUBCASE("joint count other than 25") {
        try {
            parse_ntu(ntu_text({{{1, pattern(0.0, 20)}}}));
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 4);
            CHECK(std::string(e.what()).find("25") != std::string::npos);
        }
    }
    SUBCASE("trailing frame beyond the declared count") {
        CHECK_THROWS_AS(parse_ntu(ntu_text({{{1, m}}, {{1, m}}}, 1)), ParseError);
    }
}

TEST_CASE("NTU parser: two bodies keep a stable order by id") {
    const auto a = pattern(1.0), b = pattern(-3.0);
    // body 7 appears first in frame 0, second in frame 1
    const auto r = parse_ntu(ntu_text({{{7, a}, {9, b}}, {{9, b}, {7, a}}}));
    REQUIRE(r.sequence.actor_count() == 2);
    for (const auto& frame : r.sequence.frames) {
        CHECK(frame.actors[0].id == 7);
        CHECK(frame.actors[0].joints == a);
        CHECK(frame.actors[1].id == 9);
        CHECK(frame.actors[1].joints == b);
    }
}

TEST_CASE("NTU parser: extra bodies are dropped by motion energy") {
    std::vector<std::vector<NtuBody>> frames;
    for (int n = 0; n < 4; ++n)
        frames.push_back({{1, pattern(0.0)}, {2, pattern(0.5 * n)}, {3, pattern(2.0 * n)}});
    const auto r = parse_ntu(ntu_text(frames));
    REQUIRE(r.sequence.actor_count() == 2);
    CHECK(r.sequence.frames[0].actors[0].id == 2);
    CHECK(r.sequence.frames[0].actors[1].id == 3);
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("JSON lines parser") {
    SUBCASE("header plus two frames") {
        std::istringstream in(R"({"label": 3, "joints": 2, "actors": 1}
{"actors": [[[0,0,0],[1,2,0]]]}
{"actors": [[[0,1,0],[1,2,1]]]}
)");
        const auto seq = parse_jsonl(in);
        CHECK(seq.frame_count() == 2);
        CHECK(seq.joint_count() == 2);
        CHECK(seq.label == 3);
        CHECK(seq.frames[1].actors[0].joints(2, 1) == 1.0);
    }
    SUBCASE("short line names expected and actual counts") {
        std::istringstream in(R"({"joints": 2, "actors": 1}
{"actors": [[[0,0,0],[1,2,0]]]}
{"actors": [[[0,1,0]]]}
)");
        try {
            parse_jsonl(in);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
            const std::string msg = e.what();
            CHECK(msg.find("2") != std::string::npos);
            CHECK(msg.find("1") != std::string::npos);
        }
    }
    SUBCASE("no frames") {
        std::istringstream in(R"({"joints": 2, "actors": 1})");
        CHECK_THROWS_AS(parse_jsonl(in), DataError);
    }
}

TEST_CASE("JSON lines round trip is exact") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int actors = 1 + trial % 2;
        auto seq = testing::random_sequence(rng, 1 + trial, 1 + trial % 7, actors, 1e3);
        seq.label = trial % 4;
        seq.source_id = "rt";
        std::stringstream buf;
        write_jsonl(buf, seq);
        CHECK(parse_jsonl(buf, "rt") == seq);
    }
}

TEST_CASE("manifest validation and JSON") {
    DatasetManifest m;
    m.class_names = {"a", "b"};
    m.entries = {{"x.jsonl", 0, Split::Train}, {"y.jsonl", 1, Split::Test}};
    m.validate();
    const auto back = DatasetManifest::from_json(m.to_json());
    CHECK(back.class_names == m.class_names);
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[1].split == Split::Test);

    auto dup = m;
    dup.entries[1].path = "x.jsonl";
    CHECK_THROWS_AS(dup.validate(), ConfigError);
    auto bad = m;
    bad.entries[0].label = 2;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("synthetic generator") {
    SynthSpec spec;
    spec.sequences_per_class = 60;
    spec.test_per_class = 20;

    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    REQUIRE(a.sequences.size() == 300);
    CHECK(a.sequences == b.sequences);
    CHECK(a.manifest.to_json() == b.manifest.to_json());

    std::vector<int> per_class(5, 0), test_per_class(5, 0);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < a.sequences.size(); ++i) {
        const auto& seq = a.sequences[i];
        check_invariants(seq);
        CHECK(seq.joint_count() == 25);
        CHECK(seq.frame_count() >= spec.frames_min);
        CHECK(seq.frame_count() <= spec.frames_max);
        REQUIRE(seq.label.has_value());
        CHECK(*seq.label == a.manifest.entries[i].label);
        ++per_class[*seq.label];
        if (a.manifest.entries[i].split == Split::Test) ++test_per_class[*seq.label];
        ids.insert(seq.source_id);
    }
    CHECK(ids.size() == 300);
    for (int c = 0; c < 5; ++c) {
        CHECK(per_class[c] == 60);
        CHECK(test_per_class[c] == 20);
    }

    auto other = spec;
    other.seed = 8;
    CHECK_FALSE(generate_synthetic(other).sequences == a.sequences);

    auto invalid = spec;
    invalid.class_count = 1;
    CHECK_THROWS_AS(invalid.validate(), ConfigError);
    invalid = spec;
    invalid.frames_min = 7;
    CHECK_THROWS_AS(invalid.validate(), ConfigError);
}

TEST_CASE("same motion under two injected scales encodes within one level") {
    SynthSpec spec;
    const auto base = synth_motion(spec, 2, 4);
    const auto layout = BodyPartLayout::kinect25();
    const auto small = apply_similarity(base, 0.5, Eigen::Vector3d(10, -20, 30));
    const auto large = apply_similarity(base, 2.0, Eigen::Vector3d(-70, 5, 0));
    const auto ia = encode_proposed(reorder_joints(small, layout)).image;
    const auto ib = encode_proposed(reorder_joints(large, layout)).image;
    REQUIRE(ia.rows() == ib.rows());
    std::size_t equal = 0;
    for (std::size_t i = 0; i < ia.bytes().size(); ++i) {
        CHECK(std::abs(int(ia.bytes()[i]) - int(ib.bytes()[i])) <= 1);
        equal += ia.bytes()[i] == ib.bytes()[i];
    }
    CHECK(double(equal) >= 0.99 * double(ia.bytes().size()));
}
