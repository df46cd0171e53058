#include <cmath>
#include <filesystem>

#include <doctest.h>

#include "actionimg/errors.hpp"
#include "actionimg/ingest.hpp"
#include "actionimg/layout.hpp"
#include "actionimg/mapping.hpp"
#include "test_helpers.hpp"

using namespace actionimg;

namespace {

// Direct per-pixel evaluation of the invariant mapping, written independently
// of the library: scan for ranges, then quantize each coordinate.
std::vector<int> reference_encode(const SkeletonSequence& seq) {
    double lo[3] = {INFINITY, INFINITY, INFINITY}, hi[3] = {-INFINITY, -INFINITY, -INFINITY};
    for (const auto& f : seq.frames)
        for (const auto& a : f.actors)
            for (int j = 0; j < a.joints.cols(); ++j)
                for (int k = 0; k < 3; ++k) {
                    lo[k] = std::min(lo[k], a.joints(k, j));
                    hi[k] = std::max(hi[k], a.joints(k, j));
                }
    const double d = std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]});
    const int rows = seq.joint_count(), cols = seq.frame_count();
    std::vector<int> out(std::size_t(rows) * cols * 3, 0);
    if (d < 1e-9) return out;
    for (int n = 0; n < cols; ++n)
        for (int j = 0; j < rows; ++j)
            for (int k = 0; k < 3; ++k) {
                const int v = int(std::floor((seq.frames[n].actors[0].joints(k, j) - lo[k]) / d * 255.0));
                out[(std::size_t(j) * cols + n) * 3 + k] = std::clamp(v, 0, 255);
            }
    return out;
}

bool matches_reference(const ActionImage& img, const std::vector<int>& ref) {
    for (std::size_t i = 0; i < ref.size(); ++i)
        if (int(img.bytes()[i]) != ref[i]) return false;
    return true;
}

SkeletonSequence translated(const SkeletonSequence& seq, const Eigen::Vector3d& t) {
    return apply_similarity(seq, 1.0, t);
}

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (auto b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("actionimg_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("invariant mapping: two-joint hand example") {
    JointMatrix f1(3, 2), f2(3, 2);
    f1 << 0, 1,
          0, 2,
          0, 0;
    f2 << 0, 1,
          1, 2,
          0, 1;
    const auto enc = encode_proposed(make_sequence({f1, f2}));
    CHECK_FALSE(enc.degenerate);
    REQUIRE(enc.image.rows() == 2);
    REQUIRE(enc.image.cols() == 2);
    CHECK(enc.image(1, 0, 0) == 127);
    CHECK(enc.image(1, 0, 1) == 255);
    CHECK(enc.image(1, 0, 2) == 0);
    // j1 frame 2: (0, 1, 0) -> y = 127
    CHECK(enc.image(0, 1, 1) == 127);
    CHECK(matches_reference(enc.image, reference_encode(make_sequence({f1, f2}))));
}

TEST_CASE("invariant mapping agrees with the scalar reference") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 300; ++trial) {
        const auto seq = testing::random_sequence(rng, 1 + trial % 17, 1 + trial % 13, 1, 0.1 + trial);
        const auto enc = encode_proposed(seq);
        CHECK(enc.image.rows() == seq.joint_count());
        CHECK(enc.image.cols() == seq.frame_count());
        CHECK(matches_reference(enc.image, reference_encode(seq)));
    }
}

TEST_CASE("invariant mapping: motionless sequence is degenerate") {
    const JointMatrix m = JointMatrix::Constant(3, 4, 3.5);
    const auto enc = encode_proposed(make_sequence({m, m, m}));
    CHECK(enc.degenerate);
    for (auto b : enc.image.bytes()) CHECK(b == 0);
}

TEST_CASE("invariant mapping: endpoints and isometry") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const auto seq = testing::random_sequence(rng, 2 + trial % 9, 2 + trial % 5, 1, 1.0 + trial % 7);
        const auto enc = encode_proposed(seq);
        Eigen::Vector3d lo = Eigen::Vector3d::Constant(INFINITY), hi = -lo;
        for (const auto& f : seq.frames) {
            lo = lo.cwiseMin(f.actors[0].joints.rowwise().minCoeff());
            hi = hi.cwiseMax(f.actors[0].joints.rowwise().maxCoeff());
        }
        Eigen::Index dominant;
        const double d = (hi - lo).maxCoeff(&dominant);
        int top[3] = {0, 0, 0};
        for (int n = 0; n < seq.frame_count(); ++n)
            for (int j = 0; j < seq.joint_count(); ++j)
                for (int k = 0; k < 3; ++k) {
                    const double c = seq.frames[n].actors[0].joints(k, j);
                    const int v = enc.image(j, n, k);
                    if (c == lo[k]) CHECK(v == 0);
                    if (k == dominant && c == hi[k]) CHECK(v == 255);
                    top[k] = std::max(top[k], v);
                }
        // no channel spans more than D
        for (int k = 0; k < 3; ++k) CHECK(top[k] <= int(std::floor(255.0 * (hi[k] - lo[k]) / d)) + 1);
        CHECK(top[dominant] == 255);
    }
}

TEST_CASE("invariant mapping: translation invariance is exact") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> shift(-100.0, 100.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto seq = testing::random_sequence(rng, 1 + trial % 11, 1 + trial % 9, 1, 0.5 + trial % 5);
        const Eigen::Vector3d t(shift(rng), shift(rng), shift(rng));
        CHECK(encode_proposed(translated(seq, t)).image == encode_proposed(seq).image);
    }
}

TEST_CASE("invariant mapping: scale invariance within one level") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    std::size_t total = 0, equal = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto seq = testing::random_sequence(rng, 2 + trial % 11, 1 + trial % 9);
        const auto a = encode_proposed(seq).image;
        const auto b = encode_proposed(apply_similarity(seq, scale(rng), Eigen::Vector3d::Zero())).image;
        for (std::size_t i = 0; i < a.bytes().size(); ++i) {
            CHECK(std::abs(int(a.bytes()[i]) - int(b.bytes()[i])) <= 1);
            equal += a.bytes()[i] == b.bytes()[i];
        }
        total += a.bytes().size();
    }
    CHECK(double(equal) >= 0.99 * double(total));
}

TEST_CASE("baseline mapping") {
    JointMatrix m(3, 3);
    m << 1.0, 0.0, 2.0,
         0.5, 3.0, -1.0,
         1.5, 2.0, 0.0;
    const auto seq = make_sequence({m});
    const auto img = encode_baseline(seq, {0.0, 2.0}).image;
    CHECK(img(0, 0, 0) == 127);  // 1.0 in [0, 2]
    CHECK(img(1, 0, 0) == 0);    // c_min
    CHECK(img(2, 0, 0) == 255);  // c_max
    CHECK(img(1, 0, 1) == 255);  // 3.0 clamped to c_max
    CHECK(img(2, 0, 1) == 0);    // -1.0 clamped to c_min
    CHECK(img(0, 0, 1) == 63);   // floor(255 * 0.25)

    CHECK_THROWS_AS(encode_baseline(seq, {1.0, 1.0}), ConfigError);
    CHECK_THROWS_AS((MappingMode{MappingKind::Baseline, std::nullopt}.encode(seq)), ConfigError);
}

TEST_CASE("baseline mapping is not translation invariant") {
    std::mt19937_64 rng(9);
    const auto seq = testing::random_sequence(rng, 10, 8, 1, 1.0);
    std::vector<SkeletonSequence> train{seq};
    const auto stats = compute_global_stats(train);
    const auto a = encode_baseline(seq, stats).image;

    SUBCASE("half-unit shift") {
        const auto b = encode_baseline(translated(seq, Eigen::Vector3d::Constant(0.5)), stats).image;
        CHECK_FALSE(a == b);
    }
    SUBCASE("shift of two quantization steps changes most pixels") {
        const double t = 2.0 * (stats.c_max - stats.c_min) / 255.0;
        const auto b = encode_baseline(translated(seq, Eigen::Vector3d::Constant(t)), stats).image;
        std::size_t changed = 0;
        for (std::size_t i = 0; i < a.bytes().size(); ++i) changed += a.bytes()[i] != b.bytes()[i];
        CHECK(changed * 2 >= a.bytes().size());
    }
    // the invariant mapping ignores the same shift
    CHECK(encode_proposed(translated(seq, Eigen::Vector3d::Constant(0.5))).image == encode_proposed(seq).image);
}

TEST_CASE("global stats") {
    JointMatrix a(3, 2), b(3, 1);
    a << -1, 0,
          3, 1,
          0, 2;
    b << 0.5, -2, 0;
    std::vector<SkeletonSequence> one{make_sequence({a})};
    auto s = compute_global_stats(one);
    CHECK(s.c_min == -1.0);
    CHECK(s.c_max == 3.0);

    JointMatrix c(3, 2), d(3, 1);
    c << 0, 1, 0, 1, 0, 1;
    d << -2, 0.5, 0;
    std::vector<SkeletonSequence> two{make_sequence({c}), make_sequence({d})};
    s = compute_global_stats(two);
    CHECK(s.c_min == -2.0);
    CHECK(s.c_max == 1.0);

    CHECK_THROWS(compute_global_stats(std::span<const SkeletonSequence>{}));

    const auto back = GlobalStats::from_json(s.to_json());
    CHECK(back.c_min == s.c_min);
    CHECK(back.c_max == s.c_max);
}

TEST_CASE("global stats envelope over a generated set") {
    SynthSpec spec;
    spec.sequences_per_class = 6;
    spec.test_per_class = 2;
    const auto data = generate_synthetic(spec);
    const auto stats = compute_global_stats(data.sequences);
    const double range = stats.c_max - stats.c_min;
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& seq : data.sequences)
        for (const auto& f : seq.frames)
            for (const auto& actor : f.actors) {
                const auto normalized = ((actor.joints.array() - stats.c_min) / range).eval();
                lo = std::min(lo, normalized.minCoeff());
                hi = std::max(hi, normalized.maxCoeff());
            }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
}

TEST_CASE("resize") {
    std::mt19937_64 rng(12);
    ActionImage img(5, 7);
    for (auto& b : img.bytes()) b = static_cast<std::uint8_t>(rng() % 256);

    SUBCASE("identity size") {
        const auto out = resize<double>(img, 5, 7);
        for (int r = 0; r < 5; ++r)
            for (int c = 0; c < 7; ++c)
                for (int k = 0; k < 3; ++k) CHECK(out.data(k, r * 7 + c) == img(r, c, k) / 255.0);
    }
    SUBCASE("constant image") {
        ActionImage flat(3, 9);
        for (auto& b : flat.bytes()) b = 77;
        const auto out = resize<double>(flat, 8, 5);
        CHECK((out.data.array() - 77.0 / 255.0).abs().maxCoeff() < 1e-15);
    }
    SUBCASE("checkerboard midpoint") {
        ActionImage board(2, 2);
        for (int k = 0; k < 3; ++k) {
            board(0, 0, k) = 0;
            board(0, 1, k) = 255;
            board(1, 0, k) = 255;
            board(1, 1, k) = 0;
        }
        const auto out = resize<double>(board, 3, 3);
        for (int k = 0; k < 3; ++k) CHECK(out.data(k, 4) == doctest::Approx(127.5 / 255.0).epsilon(1e-15));
        CHECK(out.data(0, 0) == 0.0);
        CHECK(out.data(0, 2) == 1.0);
    }
    SUBCASE("float output matches double within rounding") {
        const auto d = resize<double>(img, 16, 16);
        const auto f = resize<float>(img, 16, 16);
        CHECK((d.data - f.data.cast<double>()).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("PNG round trip") {
    const auto dir = temp_dir("png");
    std::mt19937_64 rng(13);

    ActionImage img(25, 61);
    for (auto& b : img.bytes()) b = static_cast<std::uint8_t>(rng() % 256);
    export_png(img, dir / "random.png");
    CHECK(import_png(dir / "random.png") == img);

    ActionImage red(1, 1);
    red(0, 0, 0) = 255;
    export_png(red, dir / "red.png");
    const auto back = import_png(dir / "red.png");
    REQUIRE(back.rows() == 1);
    CHECK(back(0, 0, 0) == 255);
    CHECK(back(0, 0, 1) == 0);
    CHECK(back(0, 0, 2) == 0);

    CHECK_THROWS_AS(import_png(dir / "missing.png"), DataError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("encoded fixture has a stable checksum") {
    const auto seq = reorder_joints(synth_motion(SynthSpec{}, 1, 0), BodyPartLayout::kinect25());
    const auto img = encode_proposed(seq).image;
    CHECK(img.rows() == 25);
    CHECK(fnv1a(img.bytes()) == 14677681583006799398ull);
}
