#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace tcpvad::io {

/// 8-bit grayscale image, row-major.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const Image&) const = default;
};

struct FrameSequence {
    std::vector<Image> frames;
    std::optional<double> frame_rate;

    std::size_t size() const noexcept { return frames.size(); }
    int height() const noexcept { return frames.empty() ? 0 : frames.front().height; }
    int width() const noexcept { return frames.empty() ? 0 : frames.front().width; }

    /// Nonempty and uniform frame dimensions.
    void validate() const;
};

struct GroundTruth {
    std::vector<std::uint8_t> frame_labels;  // 1 = abnormal
    std::vector<Image> pixel_masks;          // empty when unavailable; nonzero = abnormal

    bool has_masks() const noexcept { return !pixel_masks.empty(); }

    /// Throws when masks and labels disagree or masks do not match the frame size.
    void validate(int height, int width) const;

    /// Labels derived from masks: a frame is abnormal iff its mask is nonempty.
    static GroundTruth from_masks(std::vector<Image> masks);
};

Image read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Image& image);

/// Shell-style wildcard match supporting '*' and '?'.
bool wildcard_match(std::string_view pattern, std::string_view name);

/// Loads every file in `dir` whose name matches `pattern`, ordered by
/// filename (byte-wise lexicographic). Frames must be binary PGM (P5).
FrameSequence load_frame_sequence(const std::filesystem::path& dir, std::string_view pattern = "*.pgm");

void write_frame_sequence(const std::filesystem::path& dir, const FrameSequence& frames);

/// Bilinear resize of every frame. Aspect ratio is not preserved.
FrameSequence resize_frames(const FrameSequence& frames, int width, int height);

// Masks: FMAP u8 tensor (T,H,W) or a directory of PGM masks.
std::vector<Image> read_masks(const std::filesystem::path& path);
void write_masks(const std::filesystem::path& path, const std::vector<Image>& masks);

// Labels: one 0/1 per line.
std::vector<std::uint8_t> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

}  // namespace tcpvad::io
