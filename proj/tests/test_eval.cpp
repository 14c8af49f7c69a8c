#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "tcpvad/error.hpp"
#include "tcpvad/eval.hpp"
#include "tcpvad/frames.hpp"
#include "tcpvad/score_map.hpp"

using namespace tcpvad;
using namespace tcpvad::eval;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return Errc::InvalidArgument;
}

// One score per frame on a 1x1 grid.
ScoreMapSequence per_frame(const std::vector<double>& s) {
    auto m = ScoreMapSequence::zeros(ScoreKind::Fused, static_cast<int>(s.size()), {1, 1, 1, 1});
    for (std::size_t i = 0; i < s.size(); ++i) m.values[i] = static_cast<float>(s[i]);
    return m;
}

io::GroundTruth labels(std::vector<std::uint8_t> l) {
    io::GroundTruth gt;
    gt.frame_labels = std::move(l);
    return gt;
}

// Probability that an abnormal frame outscores a normal one, ties half.
double rank_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& l) {
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (!l[i] || l[j]) continue;
            pairs += 1;
            wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
        }
    return wins / pairs;
}

}  // namespace

TEST_CASE("frame level: perfect and inverted separation") {
    std::vector<double> s;
    std::vector<std::uint8_t> l;
    for (int i = 0; i < 10; ++i) {
        l.push_back(i >= 5);
        s.push_back(i >= 5 ? 0.9 : 0.1);
    }
    auto c = frame_level_roc(per_frame(s), labels(l));
    CHECK(c.auc == 1.0);
    CHECK(c.eer == 0.0);
    for (auto& x : l) x = !x;
    c = frame_level_roc(per_frame(s), labels(l));
    CHECK(c.auc == 0.0);
}

TEST_CASE("frame level: four-frame case") {
    const std::vector<double> s{0.9, 0.4, 0.6, 0.1};
    const std::vector<std::uint8_t> l{1, 1, 0, 0};
    const auto c = frame_level_roc(per_frame(s), labels(l));
    CHECK(c.auc == 0.75);
    CHECK(rank_auc(s, l) == 0.75);
    // points swept at every distinct score
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : c.points) pts.emplace_back(p.fpr, p.tpr);
    for (auto q : std::vector<std::pair<double, double>>{{0, 0}, {0, 0.5}, {0.5, 0.5}, {0.5, 1}, {1, 1}})
        CHECK(std::find(pts.begin(), pts.end(), q) != pts.end());
    for (std::size_t i = 1; i < c.points.size(); ++i) {
        CHECK(c.points[i].threshold <= c.points[i - 1].threshold);
        CHECK(c.points[i].fpr >= c.points[i - 1].fpr);
        CHECK(c.points[i].tpr >= c.points[i - 1].tpr);
    }
}

TEST_CASE("frame level: property, matches the rank oracle on random data") {
    testing::Gen g(1);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = g.uniform_int(2, 40);
        std::vector<double> s(n);
        std::vector<std::uint8_t> l(n);
        for (int i = 0; i < n; ++i) {
            // coarse values so ties happen
            s[i] = g.uniform_int(0, 12) / 12.0;
            l[i] = g.uniform() < 0.5;
        }
        l[0] = 1;
        l[1] = 0;
        const auto c = frame_level_roc(per_frame(s), labels(l));
        CHECK(c.auc == doctest::Approx(rank_auc(s, l)).epsilon(1e-12));
    }
}

TEST_CASE("frame level: property, invariant under monotone transforms") {
    testing::Gen g(2);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = g.uniform_int(4, 60);
        std::vector<double> s(n), t(n);
        std::vector<std::uint8_t> l(n);
        for (int i = 0; i < n; ++i) {
            s[i] = g.uniform();
            t[i] = std::pow(s[i], 3.0) * 0.5 + 0.1;
            l[i] = i % 3 == 0;
        }
        CHECK(frame_level_roc(per_frame(s), labels(l)).auc ==
              doctest::Approx(frame_level_roc(per_frame(t), labels(l)).auc).epsilon(1e-12));
    }
}

TEST_CASE("frame level: shuffled labels sit near chance") {
    testing::Gen g(3);
    const int n = 10000;
    std::vector<double> s(n);
    std::vector<std::uint8_t> l(n);
    for (int i = 0; i < n; ++i) {
        s[i] = g.uniform();
        l[i] = i < n / 2;
    }
    std::shuffle(l.begin(), l.end(), g.rng);
    const auto c = frame_level_roc(per_frame(s), labels(l));
    CHECK(std::abs(c.auc - 0.5) <= 0.05);
}

TEST_CASE("frame level: errors") {
    CHECK(code_of([&] { frame_level_roc(per_frame({0.1, 0.2}), labels({1, 0, 1})); }) == Errc::LengthMismatch);
    CHECK(code_of([&] { frame_level_roc(per_frame({0.1, 0.2}), labels({1, 1})); }) == Errc::DegenerateCurve);
}

TEST_CASE("curve summaries: fixed curves") {
    const std::vector<RocPoint> chance{{1, 0, 0}, {0, 1, 1}};
    CHECK(auc(chance) == 0.5);
    CHECK(eer(chance) == 0.5);
    const std::vector<RocPoint> perfect{{2, 0, 0}, {1, 0, 1}, {0, 1, 1}};
    CHECK(auc(perfect) == 1.0);
    CHECK(eer(perfect) == 0.0);
    const std::vector<RocPoint> bent{{2, 0, 0}, {1, 0.2, 0.6}, {0, 1, 1}};
    // trapezoids: 0.2*0.6/2 + 0.8*(0.6+1)/2
    CHECK(auc(bent) == doctest::Approx(0.06 + 0.64).epsilon(1e-12));
    // on the segment (0.2,0.6)-(1,1): tpr = 0.5 + 0.5 fpr; crossing 1 - f = 0.5 + 0.5 f -> f = 1/3
    CHECK(eer(bent) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(code_of([&] { auc(std::vector<RocPoint>{}); }) == Errc::DegenerateCurve);
}

TEST_CASE("default thresholds") {
    // 1.0 lies on the 256-value grid, the duplicate collapses
    const std::vector<double> s{1.0, 0.123, 0.123, 2.0};
    const auto th = default_thresholds(s);
    CHECK(th.size() == 256 + 2);
    CHECK(std::is_sorted(th.begin(), th.end(), std::greater<>()));
    CHECK(th.front() == 2.0);
    CHECK(th.back() == 0.0);
}

TEST_CASE("localization: 40% coverage boundary") {
    std::vector<std::uint8_t> mask(400, 0), det(400, 0);
    for (int i = 0; i < 100; ++i) mask[i * 4] = 1;
    for (int i = 0; i < 40; ++i) det[i * 4] = 1;
    CHECK(classify_localization(det, mask, true) == FrameOutcome::TruePositive);
    det[39 * 4] = 0;
    CHECK(classify_localization(det, mask, true) == FrameOutcome::FalsePositive);
    det[1] = 1;  // extra pixels outside the truth do not help
    CHECK(classify_localization(det, mask, true) == FrameOutcome::FalsePositive);
    std::fill(det.begin(), det.end(), 0);
    CHECK(classify_localization(det, mask, true) == FrameOutcome::FalseNegative);
    CHECK(classify_localization(det, std::vector<std::uint8_t>(400, 0), false) == FrameOutcome::TrueNegative);
    det[7] = 1;
    CHECK(classify_localization(det, std::vector<std::uint8_t>(400, 0), false) == FrameOutcome::FalsePositive);
}

TEST_CASE("pixel level: exact detection gives AUC 1") {
    testing::Gen g(4);
    io::GroundTruth gt;
    auto m = ScoreMapSequence::zeros(ScoreKind::Fused, 8, {6, 5, 6, 5});
    for (int t = 0; t < 8; ++t) {
        io::Image mask(5, 6);
        if (t >= 4)
            for (int k = 0; k < 5; ++k) mask.at(g.uniform_int(0, 4), g.uniform_int(0, 5)) = 255;
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 5; ++x) m.at(t, y, x) = mask.at(x, y) ? 1.0f : 0.0f;
        gt.pixel_masks.push_back(mask);
    }
    gt = io::GroundTruth::from_masks(gt.pixel_masks);
    const auto c = pixel_level_roc(m, gt);
    CHECK(c.auc == 1.0);
    CHECK(c.eer == 0.0);
}

TEST_CASE("pixel level: property, matches per-threshold classification") {
    testing::Gen g(5);
    for (int trial = 0; trial < 30; ++trial) {
        const int T = g.uniform_int(4, 12), H = g.uniform_int(3, 8), W = g.uniform_int(3, 8);
        io::GroundTruth gt;
        auto m = ScoreMapSequence::zeros(ScoreKind::Fused, T, {H, W, H, W});
        for (auto& v : m.values) v = static_cast<float>(g.uniform_int(0, 20) / 20.0);
        for (int t = 0; t < T; ++t) {
            io::Image mask(W, H);
            const bool abnormal = t % 2 == 1;
            if (abnormal)
                for (int k = g.uniform_int(1, H * W / 2); k > 0; --k) mask.at(g.uniform_int(0, W - 1), g.uniform_int(0, H - 1)) = 1;
            gt.pixel_masks.push_back(mask);
        }
        gt = io::GroundTruth::from_masks(gt.pixel_masks);
        std::vector<double> th;
        for (int k = 21; k >= -1; --k) th.push_back(k / 20.0);
        const auto c = pixel_level_roc(m, gt, th);

        std::size_t pos = 0, neg = 0;
        for (auto l : gt.frame_labels) (l ? pos : neg)++;
        for (const auto& p : c.points) {
            if (!std::isfinite(p.threshold)) continue;
            std::size_t tp = 0, fp = 0;
            for (int t = 0; t < T; ++t) {
                std::vector<std::uint8_t> det(static_cast<std::size_t>(H) * W);
                for (std::size_t i = 0; i < det.size(); ++i) det[i] = m.values[m.frame_offset(t) + i] >= p.threshold;
                const auto o = classify_localization(det, gt.pixel_masks[t].pixels, gt.frame_labels[t]);
                if (gt.frame_labels[t])
                    tp += o == FrameOutcome::TruePositive;
                else
                    fp += o == FrameOutcome::FalsePositive;
            }
            CHECK(p.tpr == static_cast<double>(tp) / pos);
            CHECK(p.fpr == static_cast<double>(fp) / neg);
        }
        // never above the frame-level curve
        CHECK(c.auc <= frame_level_roc(m, gt, th).auc + 1e-12);
    }
}

TEST_CASE("pixel level: errors") {
    auto m = ScoreMapSequence::zeros(ScoreKind::Fused, 2, {1, 1, 4, 4});
    CHECK(code_of([&] { pixel_level_roc(m, labels({0, 1})); }) == Errc::MissingMasks);
    io::GroundTruth gt = io::GroundTruth::from_masks({io::Image(4, 4), io::Image(4, 4, 255)});
    CHECK(code_of([&] { pixel_level_roc(m, gt); }) == Errc::DimensionMismatch);
}

TEST_CASE("export: chance line CSV and round-trip") {
    testing::TempDir dir("eval");
    const auto chance = make_curve({});
    CHECK(chance.auc == 0.5);
    export_results(chance, dir / "r.csv", dir / "r.svg");
    std::ifstream in(dir / "r.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    const auto text = ss.str();
    CHECK(text.rfind("threshold,fpr,tpr\n", 0) == 0);
    CHECK(text.find("\nauc,0.5\n") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "r.svg"));

    testing::Gen g(6);
    std::vector<double> s(50);
    std::vector<std::uint8_t> l(50);
    for (int i = 0; i < 50; ++i) {
        s[i] = g.uniform();
        l[i] = s[i] + g.gauss(0.3) > 0.5;
    }
    l[0] = 1;
    l[1] = 0;
    const auto c = frame_level_roc(per_frame(s), labels(l));
    export_results(c, dir / "c.csv");
    const auto back = import_results(dir / "c.csv");
    REQUIRE(back.points.size() == c.points.size());
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        CHECK(back.points[i].fpr == doctest::Approx(c.points[i].fpr).epsilon(1e-8));
        CHECK(back.points[i].tpr == doctest::Approx(c.points[i].tpr).epsilon(1e-8));
        if (std::isfinite(c.points[i].threshold))
            CHECK(back.points[i].threshold == doctest::Approx(c.points[i].threshold).epsilon(1e-8));
        else
            CHECK(back.points[i].threshold == c.points[i].threshold);
    }
    CHECK(back.auc == doctest::Approx(c.auc).epsilon(1e-8));
    CHECK(back.eer == doctest::Approx(c.eer).epsilon(1e-8));

    CHECK(code_of([&] { export_results(RocCurve{}, dir / "e.csv"); }) == Errc::DegenerateCurve);
}
