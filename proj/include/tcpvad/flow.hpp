#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "tcpvad/frames.hpp"
#include "tcpvad/grid.hpp"
#include "tcpvad/score_map.hpp"
#include "tcpvad/tcp.hpp"

namespace tcpvad::flow {

/// Dense displacement (px/frame) from frame t to frame t+1.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<float> u;
    std::vector<float> v;

    static FlowField zeros(int width, int height);
};

/// Scalar H x W map, row-major.
struct ScalarField {
    int width = 0;
    int height = 0;
    std::vector<float> values;
};

struct FlowParams {
    double smoothness = 15.0;  // Horn-Schunck regularization weight (intensity units, 0..255)
    int levels = 4;
    double scale = 0.5;  // per-level downsampling factor
    int iterations = 100;  // fixed-point sweeps per level

    void validate() const;
};

/// Coarse-to-fine Horn-Schunck. At each level frame 2 is warped by the
/// current flow and the linearized brightness-constancy plus quadratic
/// smoothness energy is minimized by Jacobi sweeps.
FlowField compute_flow(const io::Image& first, const io::Image& second, const FlowParams& params = {});

/// Flow for every consecutive frame pair (T-1 fields).
std::vector<FlowField> compute_flow_sequence(const io::FrameSequence& frames, const FlowParams& params = {});

ScalarField flow_magnitude(const FlowField& field);

/// Per cell: mean pixel magnitude of each frame pair, summed over the
/// length-1 pairs inside each block window and assigned to the window's
/// center frame; then min-max normalized over the video.
ScoreMapSequence aggregate_flow_blocks(std::span<const ScalarField> magnitudes, const GridSpec& grid,
                                       const tcp::BlockParams& block, BoundaryMode boundary = BoundaryMode::Zero);

/// Raw (un-normalized) window sums, frames without a centered window invalid.
ScoreMapSequence aggregate_flow_raw(std::span<const ScalarField> magnitudes, const GridSpec& grid,
                                    const tcp::BlockParams& block);

// FMAP f32 tensor with dims (T-1, H, W, 2), channels (u, v).
std::vector<FlowField> read_external_flow(const std::filesystem::path& path);
void write_flow(const std::filesystem::path& path, std::span<const FlowField> fields);

}  // namespace tcpvad::flow
