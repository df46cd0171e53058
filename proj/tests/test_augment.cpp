#include <cmath>
#include <numbers>

#include <doctest.h>

#include "actionimg/augment.hpp"
#include "actionimg/errors.hpp"
#include "actionimg/mapping.hpp"
#include "test_helpers.hpp"

using namespace actionimg;

namespace {

Dataset random_dataset(std::mt19937_64& rng, int count, Split split = Split::Train) {
    Dataset d;
    d.split = split;
    for (int i = 0; i < count; ++i) {
        auto seq = testing::random_sequence(rng, 10 + i % 5, 6);
        seq.label = i % 3;
        seq.source_id = "s" + std::to_string(i);
        d.sequences.push_back(std::move(seq));
    }
    return d;
}

double max_distance_error(const SkeletonSequence& a, const SkeletonSequence& b) {
    double worst = 0.0;
    for (int n = 0; n < a.frame_count(); ++n) {
        const auto& p = a.frames[n].actors[0].joints;
        const auto& q = b.frames[n].actors[0].joints;
        for (Eigen::Index i = 0; i < p.cols(); ++i)
            for (Eigen::Index j = i + 1; j < p.cols(); ++j) {
                const double d0 = (p.col(i) - p.col(j)).norm();
                const double d1 = (q.col(i) - q.col(j)).norm();
                worst = std::max(worst, std::abs(d1 - d0) / std::max(d0, 1e-300));
            }
    }
    return worst;
}

}  // namespace

TEST_CASE("rotation matrix closed forms") {
    // single-axis rotation written out by hand
    auto rx = [](double deg) {
        const double r = deg * std::numbers::pi / 180.0;
        Eigen::Matrix3d m;
        m << 1, 0, 0, 0, std::cos(r), -std::sin(r), 0, std::sin(r), std::cos(r);
        return m;
    };
    auto ry = [](double deg) {
        const double r = deg * std::numbers::pi / 180.0;
        Eigen::Matrix3d m;
        m << std::cos(r), 0, std::sin(r), 0, 1, 0, -std::sin(r), 0, std::cos(r);
        return m;
    };
    auto rz = [](double deg) {
        const double r = deg * std::numbers::pi / 180.0;
        Eigen::Matrix3d m;
        m << std::cos(r), -std::sin(r), 0, std::sin(r), std::cos(r), 0, 0, 0, 1;
        return m;
    };
    CHECK((rotation_matrix({90, 0, 0}) * Eigen::Vector3d(0, 1, 0) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-9);
    CHECK((rotation_matrix({0, 0, 0}) - Eigen::Matrix3d::Identity()).norm() == 0.0);
    const Eigen::Matrix3d expected = rz(-12) * ry(25) * rx(7);
    CHECK((rotation_matrix({7, 25, -12}) - expected).norm() < 1e-12);
}

TEST_CASE("rotate") {
    std::mt19937_64 rng(1);
    const auto seq = testing::random_sequence(rng, 6, 10, 1, 3.0);

    SUBCASE("zero angles give identity") {
        const auto out = rotate(seq, Eigen::Vector3d(0, 0, 0));
        for (int n = 0; n < seq.frame_count(); ++n)
            CHECK((out.frames[n].actors[0].joints - seq.frames[n].actors[0].joints).norm() < 1e-12);
    }
    SUBCASE("90 degrees about x at the origin") {
        JointMatrix m(3, 2);
        m << 0, 0,
             1, -1,
             0, 0;  // centroid at the origin
        const auto out = rotate(make_sequence({m}), rotation_matrix({90, 0, 0}));
        CHECK((out.frames[0].actors[0].joints.col(0) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-9);
    }
    SUBCASE("inverse rotation restores the input") {
        const Eigen::Vector3d angles(12.0, -29.0, 4.5);
        const auto back = rotate(rotate(seq, angles), Eigen::Matrix3d(rotation_matrix(angles).transpose()));
        for (int n = 0; n < seq.frame_count(); ++n)
            CHECK((back.frames[n].actors[0].joints - seq.frames[n].actors[0].joints).cwiseAbs().maxCoeff() < 1e-6);
    }
    SUBCASE("centroid is fixed") {
        const auto out = rotate(seq, Eigen::Vector3d(20, 10, -5));
        CHECK((centroid(out) - centroid(seq)).norm() < 1e-12);
    }
    SUBCASE("angles outside the range are rejected") {
        CHECK_THROWS_AS(rotate(seq, Eigen::Vector3d(30.5, 0, 0)), ConfigError);
        CHECK_THROWS_AS(rotate(seq, Eigen::Vector3d(0, 0, -31)), ConfigError);
        CHECK_NOTHROW(rotate(seq, Eigen::Vector3d(30, -30, 30)));
    }
}

TEST_CASE("rotation preserves pairwise distances and degeneracy") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> angle(-30.0, 30.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto seq = testing::random_sequence(rng, 3, 2 + trial % 10, 1, 0.01 + trial);
        const auto out = rotate(seq, Eigen::Vector3d(angle(rng), angle(rng), angle(rng)));
        CHECK(max_distance_error(seq, out) < 1e-6);
        CHECK(encode_proposed(out).degenerate == encode_proposed(seq).degenerate);
    }
    const JointMatrix still = JointMatrix::Constant(3, 4, 1.5);
    CHECK(encode_proposed(rotate(make_sequence({still, still}), Eigen::Vector3d(10, 20, 30))).degenerate);
}

TEST_CASE("add_noise") {
    std::mt19937_64 rng(3);
    const auto seq = testing::random_sequence(rng, 5, 7);

    CHECK(add_noise(seq, 0.0, 0.0, 1) == seq);
    CHECK(add_noise(seq, 0.0, 0.01, 9) == add_noise(seq, 0.0, 0.01, 9));
    CHECK_FALSE(add_noise(seq, 0.0, 0.01, 9) == add_noise(seq, 0.0, 0.01, 10));
    CHECK_THROWS_AS(add_noise(seq, 0.0, -0.1, 1), ConfigError);

    SUBCASE("sample mean over a million coordinates") {
        const JointMatrix zeros = JointMatrix::Zero(3, 1000);
        std::vector<JointMatrix> frames(334, zeros);  // 1,002,000 coordinates
        const auto noisy = add_noise(make_sequence(frames), 0.0, 0.01, 42);
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& f : noisy.frames) {
            sum += f.actors[0].joints.sum();
            count += f.actors[0].joints.size();
        }
        CHECK(count >= 1000000);
        CHECK(std::abs(sum / double(count)) < 4.0 * 0.01 / 1000.0);
    }
}

TEST_CASE("temporal_crop") {
    std::mt19937_64 rng(4);
    const auto seq = testing::random_sequence(rng, 10, 3);

    CHECK(temporal_crop(seq, 1.0, 0.3) == seq);

    const auto head = temporal_crop(seq, 0.7, 0.0);
    REQUIRE(head.frame_count() == 7);
    for (int n = 0; n < 7; ++n) CHECK(head.frames[n] == seq.frames[n]);

    const auto tail = temporal_crop(seq, 0.7, 1.0);
    REQUIRE(tail.frame_count() == 7);
    CHECK(tail.frames[0] == seq.frames[3]);
    CHECK(tail.label == seq.label);
    CHECK(tail.source_id == seq.source_id);

    for (int frames = 1; frames <= 200; ++frames) {
        for (double ratio : {0.7, 0.71, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0}) {
            const int w = crop_window(frames, ratio);
            CHECK(w >= int(std::ceil(0.7 * frames - 1e-9)));
            CHECK(w <= frames);
            CHECK(w >= 1);
        }
    }

    // retained frames are a contiguous run of the input
    const auto long_seq = testing::random_sequence(rng, 57, 2);
    std::uniform_real_distribution<double> unit(0.0, 1.0), ratio(0.7, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto out = temporal_crop(long_seq, ratio(rng), unit(rng));
        int start = -1;
        for (int n = 0; n < long_seq.frame_count(); ++n)
            if (long_seq.frames[n] == out.frames[0]) start = n;
        REQUIRE(start >= 0);
        REQUIRE(start + out.frame_count() <= long_seq.frame_count());
        for (int n = 0; n < out.frame_count(); ++n) CHECK(out.frames[n] == long_seq.frames[start + n]);
    }
}

TEST_CASE("expand") {
    std::mt19937_64 rng(5);
    const auto data = random_dataset(rng, 300);
    const auto snapshot = data.sequences;

    AugmentationSpec spec;
    const auto out = expand(data, spec);
    CHECK(out.sequences.size() == 900);
    CHECK(data.sequences == snapshot);
    CHECK(out.split == Split::Train);
    // originals come first for each sequence, copies keep the label
    CHECK(out.sequences[0] == data.sequences[0]);
    CHECK(out.sequences[1].label == data.sequences[0].label);
    CHECK_FALSE(out.sequences[1] == data.sequences[0]);

    CHECK(expand(data, spec).sequences == out.sequences);

    auto none = spec;
    none.multiplicity = 0;
    CHECK(expand(data, none).sequences == data.sequences);

    auto other = spec;
    other.seed = spec.seed + 1;
    CHECK_FALSE(expand(data, other).sequences == out.sequences);

    auto test_split = data;
    test_split.split = Split::Test;
    CHECK_THROWS_AS(expand(test_split, spec), ConfigError);

    auto bad = spec;
    bad.rotation_deg = 45;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = spec;
    bad.crop_min = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = spec;
    bad.noise_sigma = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
