#include "tcpvad/frames.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "tcpvad/error.hpp"
#include "tcpvad/tensor_io.hpp"

namespace fs = std::filesystem;

namespace tcpvad::io {

namespace {

std::string dims_str(int w, int h) { return std::to_string(w) + "x" + std::to_string(h); }

class PgmHeaderParser {
public:
    PgmHeaderParser(std::span<const std::uint8_t> bytes, const fs::path& path) : bytes_(bytes), path_(path) {}

    int next_int() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) fail("expected integer in header");
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_++] - '0');
            if (v > 1'000'000) fail("header value out of range");
        }
        return static_cast<int>(v);
    }

    void expect_magic() {
        if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != '5') fail("not a binary PGM (P5)");
        pos_ = 2;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("missing raster separator");
        return pos_ + 1;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw Error(Errc::MalformedImage, path_.string() + ": " + why);
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    const fs::path& path_;
    std::size_t pos_ = 0;
};

}  // namespace

void FrameSequence::validate() const {
    if (frames.empty()) throw Error(Errc::InvalidArgument, "frame sequence is empty");
    const auto& first = frames.front();
    for (std::size_t t = 1; t < frames.size(); ++t) {
        if (frames[t].width != first.width || frames[t].height != first.height) {
            throw Error(Errc::DimensionMismatch, "frame " + std::to_string(t) + " is " +
                                                     dims_str(frames[t].width, frames[t].height) + ", expected " +
                                                     dims_str(first.width, first.height));
        }
    }
}

void GroundTruth::validate(int height, int width) const {
    if (!has_masks()) return;
    if (pixel_masks.size() != frame_labels.size()) {
        throw Error(Errc::LengthMismatch, "mask count differs from label count");
    }
    for (std::size_t t = 0; t < pixel_masks.size(); ++t) {
        const auto& m = pixel_masks[t];
        if (m.width != width || m.height != height) {
            throw Error(Errc::DimensionMismatch, "mask " + std::to_string(t) + " is " + dims_str(m.width, m.height));
        }
        const bool any = std::any_of(m.pixels.begin(), m.pixels.end(), [](auto p) { return p != 0; });
        if (any && !frame_labels[t]) {
            throw Error(Errc::InvalidArgument, "frame " + std::to_string(t) + " has a mask but is labeled normal");
        }
    }
}

GroundTruth GroundTruth::from_masks(std::vector<Image> masks) {
    GroundTruth gt;
    gt.frame_labels.reserve(masks.size());
    for (const auto& m : masks) {
        gt.frame_labels.push_back(std::any_of(m.pixels.begin(), m.pixels.end(), [](auto p) { return p != 0; }));
    }
    gt.pixel_masks = std::move(masks);
    return gt;
}

Image read_pgm(const fs::path& path) {
    const auto bytes = read_file(path);
    PgmHeaderParser p(bytes, path);
    p.expect_magic();
    const int w = p.next_int();
    const int h = p.next_int();
    const int maxval = p.next_int();
    if (w <= 0 || h <= 0) p.fail("nonpositive dimensions");
    if (maxval <= 0 || maxval > 255) p.fail("only 8-bit PGM is supported");
    const std::size_t off = p.raster_offset();
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (bytes.size() < off + n) p.fail("raster truncated");
    Image img(w, h);
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(off), n, img.pixels.begin());
    return img;
}

void write_pgm(const fs::path& path, const Image& image) {
    const std::string header = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), image.pixels.begin(), image.pixels.end());
    write_file(path, bytes);
}

bool wildcard_match(std::string_view pattern, std::string_view name) {
    std::size_t p = 0, n = 0, star = std::string_view::npos, mark = 0;
    while (n < name.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
            ++p;
            ++n;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = n;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            n = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

FrameSequence load_frame_sequence(const fs::path& dir, std::string_view pattern) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error(Errc::IoError, dir.string() + " is not a directory");

    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto name = entry.path().filename().string();
        if (wildcard_match(pattern, name)) names.push_back(std::move(name));
    }
    if (names.empty()) {
        throw Error(Errc::EmptyDirectory, "no files matching '" + std::string(pattern) + "' in " + dir.string());
    }
    std::sort(names.begin(), names.end());

    FrameSequence seq;
    seq.frames.reserve(names.size());
    for (const auto& name : names) seq.frames.push_back(read_pgm(dir / name));
    seq.validate();
    return seq;
}

void write_frame_sequence(const fs::path& dir, const FrameSequence& frames) {
    fs::create_directories(dir);
    char name[32];
    for (std::size_t t = 0; t < frames.size(); ++t) {
        std::snprintf(name, sizeof name, "%05zu.pgm", t);
        write_pgm(dir / name, frames.frames[t]);
    }
}

FrameSequence resize_frames(const FrameSequence& frames, int width, int height) {
    if (width < 1 || height < 1) throw Error(Errc::InvalidArgument, "resize target must be positive");
    FrameSequence out;
    out.frame_rate = frames.frame_rate;
    for (const auto& src : frames.frames) {
        Image dst(width, height);
        const double sx = static_cast<double>(src.width) / width;
        const double sy = static_cast<double>(src.height) / height;
        for (int y = 0; y < height; ++y) {
            const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height - 1.0);
            const int y0 = static_cast<int>(fy);
            const int y1 = std::min(y0 + 1, src.height - 1);
            const double wy = fy - y0;
            for (int x = 0; x < width; ++x) {
                const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width - 1.0);
                const int x0 = static_cast<int>(fx);
                const int x1 = std::min(x0 + 1, src.width - 1);
                const double wx = fx - x0;
                const double v = (1 - wy) * ((1 - wx) * src.at(x0, y0) + wx * src.at(x1, y0)) +
                                 wy * ((1 - wx) * src.at(x0, y1) + wx * src.at(x1, y1));
                dst.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
        out.frames.push_back(std::move(dst));
    }
    return out;
}

std::vector<Image> read_masks(const fs::path& path) {
    std::error_code ec;
    if (fs::is_directory(path, ec)) {
        auto seq = load_frame_sequence(path, "*.pgm");
        return std::move(seq.frames);
    }
    const auto t = read_tensor(path);
    if (t.dtype != DType::U8 || t.dims.size() != 3) {
        throw Error(Errc::DimensionMismatch, "mask tensor must be u8 with dims (T,H,W)");
    }
    const int frames = static_cast<int>(t.dims[0]);
    const int h = static_cast<int>(t.dims[1]);
    const int w = static_cast<int>(t.dims[2]);
    std::vector<Image> masks;
    masks.reserve(frames);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int i = 0; i < frames; ++i) {
        Image m(w, h);
        std::copy_n(t.u8.begin() + static_cast<std::ptrdiff_t>(i * plane), plane, m.pixels.begin());
        masks.push_back(std::move(m));
    }
    return masks;
}

void write_masks(const fs::path& path, const std::vector<Image>& masks) {
    if (masks.empty()) throw Error(Errc::InvalidArgument, "no masks to write");
    const auto h = static_cast<std::uint32_t>(masks.front().height);
    const auto w = static_cast<std::uint32_t>(masks.front().width);
    std::vector<std::uint8_t> payload;
    payload.reserve(masks.size() * h * w);
    for (const auto& m : masks) {
        if (static_cast<std::uint32_t>(m.width) != w || static_cast<std::uint32_t>(m.height) != h) {
            throw Error(Errc::DimensionMismatch, "masks differ in size");
        }
        payload.insert(payload.end(), m.pixels.begin(), m.pixels.end());
    }
    write_tensor(path, Tensor::from_u8({static_cast<std::uint32_t>(masks.size()), h, w}, std::move(payload)));
}

std::vector<std::uint8_t> read_labels(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    std::vector<std::uint8_t> labels;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const char c = line[first];
        if ((c != '0' && c != '1') || line.find_first_not_of(" \t\r", first + 1) != std::string::npos) {
            throw Error(Errc::InvalidArgument, path.string() + ":" + std::to_string(lineno) + ": expected 0 or 1");
        }
        labels.push_back(c == '1');
    }
    return labels;
}

void write_labels(const fs::path& path, const std::vector<std::uint8_t>& labels) {
    std::string text;
    for (auto l : labels) text += l ? "1\n" : "0\n";
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace tcpvad::io
