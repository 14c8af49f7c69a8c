#pragma once

#include <cstdint>
#include <vector>

#include "tcpvad/binary_map.hpp"
#include "tcpvad/score_map.hpp"

namespace tcpvad::tcp {

struct BlockParams {
    int length = 14;
    int stride = 1;  // consecutive windows share length - stride frames
};

/// One grid cell followed across one window of consecutive frames.
struct VideoBlock {
    int cell = 0;    // row * cols + col
    int center = 0;  // frame the block's score is assigned to
    std::vector<std::uint32_t> codes;
};

/// Dense histogram over all 2^bits prototypes.
struct BlockHistogram {
    std::vector<std::uint32_t> counts;
    std::uint32_t total = 0;
};

enum class Orientation : std::uint8_t {
    Inverted,  // score = 1 - normalized irregularity; flat histograms score high
    Literal,   // score = normalized irregularity
};

struct ScoreParams {
    Orientation orientation = Orientation::Inverted;
    double bg_threshold = 0.1;  // normalized scores below this are background (0)
    BoundaryMode boundary = BoundaryMode::Zero;
};

/// Blocks ordered by window start, then cell index.
std::vector<VideoBlock> extract_blocks(const BinaryMapSequence& codes, const BlockParams& params);

BlockHistogram block_histogram(const VideoBlock& block, int bits);

/// Irregularity of a block histogram: sum over all bins of
/// (count[j] - count[dominant])^2, dominant = mode (lowest index on ties).
double tcp_raw(const BlockHistogram& hist);

/// Raw irregularity per (center frame, cell); frames without a centered
/// window are invalid and hold 0.
ScoreMapSequence tcp_raw_map(const BinaryMapSequence& codes, const BlockParams& params);

/// Min-max over the valid frames, orientation, background threshold, then
/// boundary fill. A constant raw map yields all zeros.
ScoreMapSequence normalize_scores(const ScoreMapSequence& raw, const ScoreParams& params);

ScoreMapSequence tcp_map_sequence(const BinaryMapSequence& codes, const BlockParams& block, const ScoreParams& score);

/// Pixel-resolution copy of a cell map: every pixel takes the value of the
/// grid cell containing it.
ScoreMapSequence upsample_map(const ScoreMapSequence& map, int height, int width);

/// Per-frame sum of cell scores, min-max normalized over the video.
std::vector<double> frame_signal(const ScoreMapSequence& map);

}  // namespace tcpvad::tcp
