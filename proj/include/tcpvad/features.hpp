#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tcpvad/frames.hpp"
#include "tcpvad/grid.hpp"
#include "tcpvad/tensor_io.hpp"

namespace tcpvad {

/// T x rows x cols grid of D-dimensional feature vectors, stored
/// row-major with the feature channel innermost (matches FMAP layout).
struct FeatureMapSequence {
    int frames = 0;
    GridSpec grid;
    int dim = 0;
    std::vector<float> values;

    std::span<const float> at(int t, int row, int col) const {
        return {values.data() + index(t, row, col), static_cast<std::size_t>(dim)};
    }
    std::span<float> at(int t, int row, int col) {
        return {values.data() + index(t, row, col), static_cast<std::size_t>(dim)};
    }

    std::size_t vectors() const noexcept { return static_cast<std::size_t>(frames) * grid.cells(); }

    io::Tensor to_tensor() const;
    /// `frame_height`/`frame_width` give the pixel geometry the grid covers.
    static FeatureMapSequence from_tensor(const io::Tensor& tensor, int frame_height, int frame_width);

private:
    std::size_t index(int t, int row, int col) const noexcept {
        return ((static_cast<std::size_t>(t) * grid.rows + row) * grid.cols + col) * dim;
    }
};

namespace io {

inline constexpr int kToyFeatureDim = 16;

/// Hand-crafted per-cell descriptor standing in for CNN feature maps.
/// Channels, all in [0,1]:
///   0      mean intensity
///   1      intensity standard deviation
///   2..9   unsigned gradient-orientation histogram, magnitude weighted
///   10..11 positive / negative temporal difference vs the previous frame
///   12..15 quadrant means (top-left, top-right, bottom-left, bottom-right)
FeatureMapSequence extract_toy_features(const FrameSequence& frames, int grid_rows, int grid_cols);

}  // namespace io
}  // namespace tcpvad
