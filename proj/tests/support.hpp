#pragma once

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tcpvad/binary_map.hpp"
#include "tcpvad/features.hpp"
#include "tcpvad/frames.hpp"

namespace testing {

// Scratch directory removed on scope exit.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("tcpvad_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
    double uniform(double lo = 0, double hi = 1) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    double gauss(double sd = 1) { return std::normal_distribution<double>(0, sd)(rng); }

    std::vector<std::uint32_t> codes(std::size_t n, std::uint32_t count) {
        std::vector<std::uint32_t> out(n);
        for (auto& c : out) c = static_cast<std::uint32_t>(uniform_int(0, static_cast<int>(count) - 1));
        return out;
    }

    tcpvad::io::Image image(int w, int h) {
        tcpvad::io::Image img(w, h);
        for (auto& p : img.pixels) p = static_cast<std::uint8_t>(uniform_int(0, 255));
        return img;
    }
};

inline tcpvad::BinaryMapSequence make_codes(int frames, int rows, int cols, int bits, int height = 0, int width = 0) {
    tcpvad::BinaryMapSequence b;
    b.frames = frames;
    b.grid = {rows, cols, height ? height : rows * 4, width ? width : cols * 4};
    b.bits = bits;
    b.codes.assign(static_cast<std::size_t>(frames) * rows * cols, 0);
    return b;
}

inline tcpvad::FeatureMapSequence make_features(int frames, int rows, int cols, int dim) {
    tcpvad::FeatureMapSequence f;
    f.frames = frames;
    f.grid = {rows, cols, rows * 4, cols * 4};
    f.dim = dim;
    f.values.assign(static_cast<std::size_t>(frames) * rows * cols * dim, 0.0f);
    return f;
}

}  // namespace testing
