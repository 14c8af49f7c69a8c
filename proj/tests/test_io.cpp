#include <doctest.h>

#include <cstring>
#include <fstream>

#include "support.hpp"
#include "tcpvad/error.hpp"
#include "tcpvad/frames.hpp"
#include "tcpvad/synthetic.hpp"
#include "tcpvad/tensor_io.hpp"

using namespace tcpvad;
using namespace tcpvad::io;

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

}  // namespace

TEST_CASE("fmap: 2x2 f32 tensor size and round-trip") {
    testing::TempDir dir("fmap");
    const auto t = Tensor::from_f32({1, 2, 2, 1}, {1, 2, 3, 4});
    write_tensor(dir / "t.fmap", t);
    // magic + version + dtype + rank + 4 dims + 4 floats
    constexpr std::size_t expected = 4 + 1 + 1 + 4 + 4 * 4 + 4 * 4;
    CHECK(std::filesystem::file_size(dir / "t.fmap") == expected);
    CHECK(read_tensor(dir / "t.fmap") == t);

    const auto bytes = read_file(dir / "t.fmap");
    CHECK(std::memcmp(bytes.data(), "FMAP", 4) == 0);
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    CHECK(bytes[6] == 4);  // rank, little-endian
    CHECK(bytes[7] == 0);
}

TEST_CASE("fmap: bad magic, version, truncation") {
    auto bytes = encode_tensor(Tensor::from_u8({3}, {1, 2, 3}));
    auto bad = bytes;
    std::memcpy(bad.data(), "XMAP", 4);
    CHECK(code_of([&] { decode_tensor(bad); }) == Errc::BadMagic);
    bad = bytes;
    bad[4] = 2;
    CHECK(code_of([&] { decode_tensor(bad); }) == Errc::UnsupportedVersion);
    bad = bytes;
    bad.pop_back();
    CHECK(code_of([&] { decode_tensor(bad); }) == Errc::TruncatedPayload);
    CHECK(code_of([&] { decode_tensor(std::span(bytes.data(), 3)); }) != Errc::InvalidArgument);
    CHECK(is_io_error(Errc::BadMagic));

    testing::TempDir dir("fmap");
    auto x = bytes;
    std::memcpy(x.data(), "XMAP", 4);
    write_file(dir / "x.fmap", x);
    CHECK(code_of([&] { read_tensor(dir / "x.fmap"); }) == Errc::BadMagic);
}

TEST_CASE("fmap: raw payload writer matches tensor writer") {
    testing::TempDir dir("fmap");
    const std::vector<std::uint32_t> dims{2, 3};
    const std::vector<std::uint8_t> payload{9, 8, 7, 6, 5, 4};
    write_tensor(dir / "a.fmap", dims, DType::U8, payload);
    CHECK(read_tensor(dir / "a.fmap") == Tensor::from_u8({2, 3}, payload));
}

TEST_CASE("fmap: property, 100 random tensors are bit-identical after round-trip") {
    testing::Gen g(11);
    for (int i = 0; i < 100; ++i) {
        std::vector<std::uint32_t> dims;
        if (i == 0) {
            dims = {15, 5, 8, 7};
        } else {
            const int rank = g.uniform_int(1, 4);
            for (int k = 0; k < rank; ++k) dims.push_back(static_cast<std::uint32_t>(g.uniform_int(1, 9)));
        }
        std::size_t n = 1;
        for (auto d : dims) n *= d;
        Tensor t;
        if (g.uniform() < 0.5) {
            std::vector<float> v(n);
            for (auto& x : v) {
                // random bit patterns, excluding NaNs so operator== is meaningful
                std::uint32_t bits;
                do {
                    bits = static_cast<std::uint32_t>(g.rng());
                    std::memcpy(&x, &bits, 4);
                } while (x != x);
            }
            t = Tensor::from_f32(dims, v);
        } else {
            std::vector<std::uint8_t> v(n);
            for (auto& x : v) x = static_cast<std::uint8_t>(g.rng());
            t = Tensor::from_u8(dims, v);
        }
        const auto bytes = encode_tensor(t);
        const auto back = decode_tensor(bytes);
        CHECK(back == t);
        CHECK(encode_tensor(back) == bytes);
    }
}

TEST_CASE("pgm: directory of 20 frames loads in filename order") {
    testing::TempDir dir("pgm");
    testing::Gen g(3);
    std::vector<Image> written;
    for (int i = 20; i >= 1; --i) {
        char name[16];
        std::snprintf(name, sizeof name, "%03d.pgm", i);
        auto img = g.image(64, 48);
        img.at(0, 0) = static_cast<std::uint8_t>(i);
        write_pgm(dir / name, img);
    }
    std::ofstream(dir / "notes.txt") << "ignored";
    const auto seq = load_frame_sequence(dir.path, "*.pgm");
    CHECK(seq.size() == 20);
    CHECK(seq.height() == 48);
    CHECK(seq.width() == 64);
    for (int i = 0; i < 20; ++i) CHECK(seq.frames[i].at(0, 0) == i + 1);
}

TEST_CASE("pgm: single native-resolution frame") {
    testing::TempDir dir("pgm");
    testing::Gen g(4);
    const auto img = g.image(238, 158);
    write_pgm(dir / "f.pgm", img);
    const auto seq = load_frame_sequence(dir.path);
    REQUIRE(seq.size() == 1);
    CHECK(seq.width() == 238);
    CHECK(seq.height() == 158);
    CHECK(seq.frames[0] == img);
}

TEST_CASE("pgm: failures") {
    testing::TempDir dir("pgm");
    testing::Gen g(5);
    write_pgm(dir / "a.pgm", g.image(64, 48));
    write_pgm(dir / "b.pgm", g.image(32, 24));
    CHECK(code_of([&] { load_frame_sequence(dir.path); }) == Errc::DimensionMismatch);

    testing::TempDir empty("pgm_empty");
    CHECK(code_of([&] { load_frame_sequence(empty.path); }) == Errc::EmptyDirectory);

    std::ofstream(empty / "bad.pgm") << "P2\n2 2\n255\n0 0 0 0\n";
    CHECK(code_of([&] { load_frame_sequence(empty.path); }) == Errc::MalformedImage);
    std::ofstream(empty / "bad.pgm", std::ios::trunc) << "P5\n4 4\n255\n";
    CHECK(code_of([&] { read_pgm(empty / "bad.pgm"); }) == Errc::MalformedImage);
}

TEST_CASE("pgm: header comments") {
    testing::TempDir dir("pgm");
    {
        std::ofstream f(dir / "c.pgm", std::ios::binary);
        f << "P5\n# a comment\n2 1\n# another\n255\n";
        f.put(static_cast<char>(10)).put(static_cast<char>(200));
    }
    const auto img = read_pgm(dir / "c.pgm");
    CHECK(img.width == 2);
    CHECK(img.at(1, 0) == 200);
}

TEST_CASE("wildcards") {
    CHECK(wildcard_match("*.pgm", "001.pgm"));
    CHECK_FALSE(wildcard_match("*.pgm", "001.png"));
    CHECK(wildcard_match("f??.pgm", "f01.pgm"));
    CHECK_FALSE(wildcard_match("f?.pgm", "f01.pgm"));
    CHECK(wildcard_match("*", ""));
}

TEST_CASE("masks and labels round-trip") {
    testing::TempDir dir("gt");
    testing::Gen g(6);
    std::vector<Image> masks;
    for (int t = 0; t < 4; ++t) {
        Image m(10, 6);
        if (t >= 2) m.at(g.uniform_int(0, 9), g.uniform_int(0, 5)) = 255;
        masks.push_back(m);
    }
    write_masks(dir / "m.fmap", masks);
    CHECK(read_masks(dir / "m.fmap") == masks);
    const auto gt = GroundTruth::from_masks(masks);
    CHECK(gt.frame_labels == std::vector<std::uint8_t>{0, 0, 1, 1});

    write_labels(dir / "l.txt", gt.frame_labels);
    CHECK(read_labels(dir / "l.txt") == gt.frame_labels);
    std::ofstream(dir / "bad.txt") << "0\n2\n";
    CHECK(code_of([&] { read_labels(dir / "bad.txt"); }) == Errc::InvalidArgument);
}

TEST_CASE("resize is bilinear and keeps constant frames constant") {
    FrameSequence seq;
    seq.frames.push_back(Image(40, 30, 77));
    const auto r = resize_frames(seq, 23, 17);
    CHECK(r.width() == 23);
    CHECK(r.height() == 17);
    for (auto p : r.frames[0].pixels) CHECK(p == 77);
}

TEST_CASE("synthetic: default settings give 30 normal and 30 abnormal frames") {
    const SyntheticSpec spec;
    const auto v = generate_synthetic(spec);
    REQUIRE(v.frames.size() == 60);
    CHECK(v.frames.height() == 96);
    CHECK(v.frames.width() == 128);
    REQUIRE(v.truth.frame_labels.size() == 60);
    for (int t = 0; t < 60; ++t) {
        const bool any = std::any_of(v.truth.pixel_masks[t].pixels.begin(), v.truth.pixel_masks[t].pixels.end(),
                                     [](auto p) { return p != 0; });
        CHECK(v.truth.frame_labels[t] == (t >= 30 ? 1 : 0));
        CHECK(any == (t >= 30));
    }
}

TEST_CASE("synthetic: deterministic byte-for-byte") {
    testing::TempDir dir("synth");
    SyntheticSpec spec;
    spec.frames = 20;
    spec.anomaly_onset = 10;
    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    CHECK(a.frames.frames == b.frames.frames);
    CHECK(a.truth.pixel_masks == b.truth.pixel_masks);
    write_frame_sequence(dir / "a", a.frames);
    write_frame_sequence(dir / "b", b.frames);
    for (const auto& e : std::filesystem::directory_iterator(dir / "a")) {
        CHECK(read_file(e.path()) == read_file(dir / "b" / e.path().filename().string()));
    }
    spec.seed = 8;
    CHECK_FALSE(generate_synthetic(spec).frames.frames == a.frames.frames);
}

TEST_CASE("synthetic: invalid specs") {
    SyntheticSpec spec;
    spec.anomaly_speed = spec.normal_speed;
    CHECK(code_of([&] { generate_synthetic(spec); }) == Errc::InvalidSpec);
    spec = {};
    spec.anomaly_onset = 60;
    CHECK(code_of([&] { generate_synthetic(spec); }) == Errc::InvalidSpec);
    spec = {};
    spec.frames = 0;
    CHECK(code_of([&] { generate_synthetic(spec); }) == Errc::InvalidSpec);
}
