#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "support.hpp"
#include "tcpvad/error.hpp"
#include "tcpvad/score_map.hpp"
#include "tcpvad/tcp.hpp"

using namespace tcpvad;
using namespace tcpvad::tcp;

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

// Direct transcription of the irregularity sum, in integers.
long long brute_tcp(const std::vector<std::uint32_t>& counts) {
    long long peak = 0;
    for (auto c : counts) peak = std::max<long long>(peak, c);
    long long s = 0;
    for (auto c : counts) s += (static_cast<long long>(c) - peak) * (static_cast<long long>(c) - peak);
    return s;
}

BlockHistogram hist_of(std::vector<std::uint32_t> counts) {
    BlockHistogram h;
    h.total = std::accumulate(counts.begin(), counts.end(), 0u);
    h.counts = std::move(counts);
    return h;
}

ScoreMapSequence raw_map(int frames, int rows, int cols, std::vector<float> values) {
    auto m = ScoreMapSequence::zeros(ScoreKind::RawTcp, frames, {rows, cols, rows * 2, cols * 2});
    m.values = std::move(values);
    std::fill(m.valid.begin(), m.valid.end(), 1);
    return m;
}

}  // namespace

TEST_CASE("blocks: window counts") {
    auto codes = testing::make_codes(20, 8, 5, 7);
    CHECK(extract_blocks(codes, {14, 1}).size() == 280);
    codes = testing::make_codes(14, 8, 5, 7);
    const auto one = extract_blocks(codes, {14, 1});
    CHECK(one.size() == 40);
    for (const auto& b : one) {
        CHECK(b.codes.size() == 14);
        CHECK(b.center == 7);
    }
    codes = testing::make_codes(13, 8, 5, 7);
    CHECK(code_of([&] { extract_blocks(codes, {14, 1}); }) == Errc::SequenceTooShort);
    codes = testing::make_codes(30, 2, 2, 7);
    CHECK(extract_blocks(codes, {14, 4}).size() == 5 * 4);  // starts 0,4,8,12,16
}

TEST_CASE("blocks: ordering and members") {
    testing::Gen g(1);
    auto codes = testing::make_codes(16, 2, 3, 4);
    codes.codes = g.codes(codes.codes.size(), 16);
    const auto blocks = extract_blocks(codes, {14, 1});
    REQUIRE(blocks.size() == 3 * 6);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const int start = static_cast<int>(i / 6), cell = static_cast<int>(i % 6);
        CHECK(blocks[i].cell == cell);
        CHECK(blocks[i].center == start + 7);
        for (int k = 0; k < 14; ++k) CHECK(blocks[i].codes[k] == codes.at(start + k, cell / 3, cell % 3));
    }
}

TEST_CASE("histogram: fixed blocks") {
    VideoBlock b;
    b.codes.assign(14, 5);
    auto h = block_histogram(b, 7);
    CHECK(h.counts.size() == 128);
    CHECK(h.counts[5] == 14);
    CHECK(h.total == 14);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), 0u) == 14);

    b.codes = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
    h = block_histogram(b, 7);
    CHECK(h.counts[0] == 7);
    CHECK(h.counts[1] == 7);

    b.codes[3] = 128;
    CHECK(code_of([&] { block_histogram(b, 7); }) == Errc::CodeOutOfRange);
}

TEST_CASE("histogram: property, mass is conserved over 1000 random blocks") {
    testing::Gen g(2);
    for (int i = 0; i < 1000; ++i) {
        const int bits = g.uniform_int(1, 8);
        const int len = g.uniform_int(1, 30);
        VideoBlock b;
        b.codes = g.codes(len, 1u << bits);
        const auto h = block_histogram(b, bits);
        CHECK(h.counts.size() == (1u << bits));
        CHECK(std::accumulate(h.counts.begin(), h.counts.end(), 0u) == static_cast<unsigned>(len));
        CHECK(h.total == static_cast<unsigned>(len));
    }
}

TEST_CASE("irregularity: closed forms") {
    CHECK(tcp_raw(hist_of(std::vector<std::uint32_t>(128, 3))) == 0.0);
    std::vector<std::uint32_t> single(128, 0);
    single[40] = 14;
    CHECK(tcp_raw(hist_of(single)) == 127.0 * 14 * 14);
    CHECK(tcp_raw(hist_of(single)) == 24892.0);
    std::vector<std::uint32_t> c(128, 0);
    c[0] = 3;
    c[1] = 1;
    CHECK(tcp_raw(hist_of(c)) == 1138.0);
    CHECK(code_of([&] { tcp_raw(hist_of(std::vector<std::uint32_t>(8, 0))); }) == Errc::EmptyHistogram);
}

TEST_CASE("irregularity: property, matches brute force on 1000 random histograms") {
    testing::Gen g(3);
    for (int i = 0; i < 1000; ++i) {
        const int bins = 1 << g.uniform_int(1, 8);
        VideoBlock b;
        b.codes = g.codes(g.uniform_int(1, 40), bins);
        const auto h = block_histogram(b, std::countr_zero(static_cast<unsigned>(bins)));
        CHECK(tcp_raw(h) == static_cast<double>(brute_tcp(h.counts)));
    }
}

TEST_CASE("normalization: two values, inverted and literal") {
    auto raw = raw_map(1, 1, 2, {0, 10});
    auto n = normalize_scores(raw, {Orientation::Inverted, 0.1, BoundaryMode::Zero});
    CHECK(n.kind == ScoreKind::NormalizedTcp);
    CHECK(n.values == std::vector<float>{1, 0});
    n = normalize_scores(raw, {Orientation::Inverted, 0.0, BoundaryMode::Zero});
    CHECK(n.values == std::vector<float>{1, 0});
    n = normalize_scores(raw, {Orientation::Literal, 0.1, BoundaryMode::Zero});
    CHECK(n.values == std::vector<float>{0, 1});
}

TEST_CASE("normalization: background threshold") {
    auto raw = raw_map(1, 1, 4, {0, 95, 50, 100});
    const auto n = normalize_scores(raw, {Orientation::Inverted, 0.1, BoundaryMode::Zero});
    CHECK(n.values[0] == doctest::Approx(1.0));
    CHECK(n.values[1] == 0.0f);  // 0.05 < 0.1
    CHECK(n.values[2] == doctest::Approx(0.5));
    CHECK(n.values[3] == 0.0f);
}

TEST_CASE("normalization: constant map gives zeros; wrong kind rejected") {
    auto raw = raw_map(2, 2, 2, std::vector<float>(8, 24892));
    const auto n = normalize_scores(raw, {});
    for (auto v : n.values) CHECK(v == 0.0f);
    auto wrong = raw;
    wrong.kind = ScoreKind::Flow;
    CHECK_THROWS_AS(normalize_scores(wrong, {}), Error);
}

TEST_CASE("score maps: identical codes give all-zero scores") {
    auto codes = testing::make_codes(20, 5, 8, 7);
    std::fill(codes.codes.begin(), codes.codes.end(), 42);
    const auto m = tcp_map_sequence(codes, {}, {});
    CHECK(m.frames == 20);
    CHECK(m.grid.rows == 5);
    CHECK(m.grid.cols == 8);
    for (auto v : m.values) CHECK(v == 0.0f);
}

TEST_CASE("score maps: alternating cell is the unique maximum") {
    auto codes = testing::make_codes(20, 8, 5, 7);
    for (int t = 0; t < 20; ++t)
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 5; ++c) codes.at(t, r, c) = (r == 3 && c == 2) ? (t % 2 ? 17u : 90u) : 6u;
    const auto raw = tcp_raw_map(codes, {});
    const auto m = normalize_scores(raw, {});
    CHECK(m.to_tensor().dims == std::vector<std::uint32_t>{20, 8, 5});
    for (int t = 7; t <= 13; ++t) {
        // oracle for the alternating block
        std::vector<std::uint32_t> counts(128, 0);
        counts[17] = 7;
        counts[90] = 7;
        CHECK(raw.at(t, 3, 2) == static_cast<float>(brute_tcp(counts)));
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 5; ++c)
                if (r != 3 || c != 2) CHECK(m.at(t, r, c) < m.at(t, 3, 2));
        CHECK(m.at(t, 3, 2) == 1.0f);
    }
}

TEST_CASE("score maps: static scene is background, diverse appearance scores high") {
    testing::Gen g(4);
    auto codes = testing::make_codes(30, 2, 2, 7);
    for (int t = 0; t < 30; ++t) {
        codes.at(t, 0, 0) = 3;                                       // static
        codes.at(t, 0, 1) = 3;                                       // static
        codes.at(t, 1, 0) = static_cast<std::uint32_t>(t % 2 ? 3 : 4);  // mild change
        codes.at(t, 1, 1) = static_cast<std::uint32_t>(g.uniform_int(0, 127));  // diverse
    }
    const auto m = tcp_map_sequence(codes, {}, {});
    for (int t = 7; t <= 23; ++t) {
        CHECK(m.at(t, 0, 0) == 0.0f);
        CHECK(m.at(t, 1, 1) > 0.9f);
        CHECK(m.at(t, 1, 1) > m.at(t, 1, 0));
    }
}

TEST_CASE("score maps: boundary frames") {
    testing::Gen g(5);
    auto codes = testing::make_codes(20, 2, 2, 3);
    codes.codes = g.codes(codes.codes.size(), 8);
    const auto raw = tcp_raw_map(codes, {});
    const auto centers = window_centers(20, 14, 1);
    CHECK(centers.front() == 7);
    CHECK(centers.back() == 13);
    for (int t = 0; t < 20; ++t) CHECK(raw.valid[t] == (t >= 7 && t <= 13 ? 1 : 0));

    const auto zero = normalize_scores(raw, {Orientation::Inverted, 0.1, BoundaryMode::Zero});
    const auto rep = normalize_scores(raw, {Orientation::Inverted, 0.1, BoundaryMode::Replicate});
    for (int t = 0; t < 20; ++t)
        for (int c = 0; c < 4; ++c) {
            const int nearest = std::clamp(t, 7, 13);
            if (t < 7 || t > 13) CHECK(zero.values[t * 4 + c] == 0.0f);
            CHECK(rep.values[t * 4 + c] == zero.values[nearest * 4 + c]);
        }
}

TEST_CASE("fill_boundary: ties resolve to the earlier frame") {
    auto m = ScoreMapSequence::zeros(ScoreKind::Flow, 5, {1, 1, 2, 2});
    m.values = {0, 1, 0, 3, 0};
    m.valid = {0, 1, 0, 1, 0};
    fill_boundary(m, BoundaryMode::Replicate);
    CHECK(m.values == std::vector<float>{1, 1, 1, 3, 3});
}

TEST_CASE("upsample: fixed cases") {
    auto m = ScoreMapSequence::zeros(ScoreKind::NormalizedTcp, 1, {1, 1, 10, 10});
    m.values = {0.7f};
    auto up = upsample_map(m, 10, 10);
    CHECK(up.grid.rows == 10);
    CHECK(up.grid.cols == 10);
    for (auto v : up.values) CHECK(v == 0.7f);

    m = ScoreMapSequence::zeros(ScoreKind::NormalizedTcp, 1, {2, 2, 4, 4});
    m.values = {1, 0, 0, 1};
    up = upsample_map(m, 4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(up.at(0, y, x) == ((y < 2) == (x < 2) ? 1.0f : 0.0f));

    CHECK(code_of([&] { upsample_map(m, 5, 4); }) == Errc::DimensionMismatch);
}

TEST_CASE("upsample: property, pixel sum equals area-weighted cell sum") {
    testing::Gen g(6);
    for (int trial = 0; trial < 50; ++trial) {
        const int rows = g.uniform_int(1, 6), cols = g.uniform_int(1, 9);
        const int h = rows * g.uniform_int(1, 5) + g.uniform_int(0, rows - 1);
        const int w = cols * g.uniform_int(1, 5) + g.uniform_int(0, cols - 1);
        auto m = ScoreMapSequence::zeros(ScoreKind::Flow, 2, {rows, cols, h, w});
        for (auto& v : m.values) v = static_cast<float>(g.uniform());
        const auto up = upsample_map(m, h, w);
        for (int t = 0; t < 2; ++t) {
            double expected = 0, got = 0;
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c) expected += double(m.at(t, r, c)) * m.grid.cell(r, c).area();
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) got += up.at(t, y, x);
            CHECK(got == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("frame signal") {
    auto m = ScoreMapSequence::zeros(ScoreKind::NormalizedTcp, 4, {2, 2, 4, 4});
    for (auto v : frame_signal(m)) CHECK(v == 0.0);
    m.at(2, 1, 0) = 0.3f;
    m.at(2, 0, 1) = 0.2f;
    CHECK(frame_signal(m) == std::vector<double>{0, 0, 1, 0});
}

TEST_CASE("grid geometry") {
    GridSpec g{5, 8, 96, 128};
    CHECK(g.cell(0, 0).area() == 19 * 16);
    CHECK(g.cell(4, 7).row1 == 96);
    CHECK(g.cell(4, 7).row0 == 76);
    CHECK(g.row_of(95) == 4);
    CHECK(g.col_of(127) == 7);
    int total = 0;
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 8; ++c) total += g.cell(r, c).area();
    CHECK(total == 96 * 128);
    GridSpec bad{5, 8, 4, 128};
    CHECK(code_of([&] { bad.validate(); }) == Errc::GridTooFine);
}
