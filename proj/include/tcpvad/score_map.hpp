#pragma once

#include <cstdint>
#include <vector>

#include "tcpvad/grid.hpp"
#include "tcpvad/tensor_io.hpp"

namespace tcpvad {

enum class ScoreKind : std::uint8_t { RawTcp, NormalizedTcp, Flow, Fused };

/// How frames that no block window is centered on get their value.
enum class BoundaryMode : std::uint8_t {
    Zero,       // score 0
    Replicate,  // copy the nearest frame that has a centered window
};

/// T x rows x cols score grid. `valid[t]` is 1 when frame t carries a value
/// computed from a block window centered on it.
struct ScoreMapSequence {
    ScoreKind kind = ScoreKind::RawTcp;
    int frames = 0;
    GridSpec grid;
    std::vector<float> values;
    std::vector<std::uint8_t> valid;

    static ScoreMapSequence zeros(ScoreKind kind, int frames, const GridSpec& grid);

    float at(int t, int row, int col) const { return values[index(t, row, col)]; }
    float& at(int t, int row, int col) { return values[index(t, row, col)]; }

    std::size_t plane_size() const noexcept { return static_cast<std::size_t>(grid.rows) * grid.cols; }
    std::size_t frame_offset(int t) const noexcept { return static_cast<std::size_t>(t) * plane_size(); }

    /// Largest value of frame t.
    float frame_max(int t) const;

    io::Tensor to_tensor() const;
    /// Every frame is marked valid; the tensor does not carry validity.
    static ScoreMapSequence from_tensor(const io::Tensor& tensor, ScoreKind kind, int frame_height, int frame_width);

private:
    std::size_t index(int t, int row, int col) const noexcept {
        return frame_offset(t) + static_cast<std::size_t>(row) * grid.cols + col;
    }
};

/// Center frames of the sliding windows [s, s + length) for s = 0, stride, ...
/// A window is centered on s + floor(length / 2).
std::vector<int> window_centers(int frames, int length, int stride);

/// Marks frames listed in `centers` valid, others invalid.
std::vector<std::uint8_t> validity_from_centers(int frames, const std::vector<int>& centers);

/// Fills invalid frames according to `mode`. Ties between equally near
/// valid frames resolve to the earlier one.
void fill_boundary(ScoreMapSequence& map, BoundaryMode mode);

/// Min-max rescale of the valid frames to [0,1] (all zeros when constant).
/// Invalid frames are set to 0.
void minmax_normalize(ScoreMapSequence& map);

}  // namespace tcpvad
