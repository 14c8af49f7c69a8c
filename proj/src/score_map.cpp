#include "tcpvad/score_map.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <limits>

#include "tcpvad/error.hpp"

namespace tcpvad {

ScoreMapSequence ScoreMapSequence::zeros(ScoreKind kind, int frames, const GridSpec& grid) {
    ScoreMapSequence m;
    m.kind = kind;
    m.frames = frames;
    m.grid = grid;
    m.values.assign(static_cast<std::size_t>(frames) * grid.cells(), 0.0f);
    m.valid.assign(static_cast<std::size_t>(frames), 1);
    return m;
}

float ScoreMapSequence::frame_max(int t) const {
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(frame_offset(t));
    return *std::max_element(first, first + static_cast<std::ptrdiff_t>(plane_size()));
}

io::Tensor ScoreMapSequence::to_tensor() const {
    return io::Tensor::from_f32(
        {static_cast<std::uint32_t>(frames), static_cast<std::uint32_t>(grid.rows), static_cast<std::uint32_t>(grid.cols)},
        values);
}

ScoreMapSequence ScoreMapSequence::from_tensor(const io::Tensor& tensor, ScoreKind kind, int frame_height,
                                               int frame_width) {
    if (tensor.dtype != io::DType::F32 || tensor.dims.size() != 3) {
        throw Error(Errc::DimensionMismatch, "score maps must be f32 with dims (T,rows,cols)");
    }
    GridSpec grid{static_cast<int>(tensor.dims[1]), static_cast<int>(tensor.dims[2]), frame_height, frame_width};
    grid.validate();
    auto m = zeros(kind, static_cast<int>(tensor.dims[0]), grid);
    m.values = tensor.f32;
    return m;
}

std::vector<int> window_centers(int frames, int length, int stride) {
    if (length < 1 || stride < 1) throw Error(Errc::InvalidArgument, "block length and stride must be positive");
    if (frames < length) {
        throw Error(Errc::SequenceTooShort,
                    std::to_string(frames) + " frames for block length " + std::to_string(length));
    }
    std::vector<int> centers;
    for (int s = 0; s + length <= frames; s += stride) centers.push_back(s + length / 2);
    return centers;
}

std::vector<std::uint8_t> validity_from_centers(int frames, const std::vector<int>& centers) {
    std::vector<std::uint8_t> valid(static_cast<std::size_t>(frames), 0);
    for (int c : centers) valid[static_cast<std::size_t>(c)] = 1;
    return valid;
}

void fill_boundary(ScoreMapSequence& map, BoundaryMode mode) {
    std::vector<int> valid_frames;
    for (int t = 0; t < map.frames; ++t)
        if (map.valid[t]) valid_frames.push_back(t);

    const auto plane = static_cast<std::ptrdiff_t>(map.plane_size());
    for (int t = 0; t < map.frames; ++t) {
        if (map.valid[t]) continue;
        auto dst = map.values.begin() + static_cast<std::ptrdiff_t>(map.frame_offset(t));
        if (mode == BoundaryMode::Zero || valid_frames.empty()) {
            std::fill(dst, dst + plane, 0.0f);
            continue;
        }
        int source = valid_frames.front();
        for (int v : valid_frames)
            if (std::abs(v - t) < std::abs(source - t)) source = v;
        auto src = map.values.begin() + static_cast<std::ptrdiff_t>(map.frame_offset(source));
        std::copy(src, src + plane, dst);
    }
}

void minmax_normalize(ScoreMapSequence& map) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < map.frames; ++t) {
        if (!map.valid[t]) continue;
        const auto off = map.frame_offset(t);
        for (std::size_t i = 0; i < map.plane_size(); ++i) {
            lo = std::min(lo, static_cast<double>(map.values[off + i]));
            hi = std::max(hi, static_cast<double>(map.values[off + i]));
        }
    }
    const double range = hi - lo;
    for (int t = 0; t < map.frames; ++t) {
        const auto off = map.frame_offset(t);
        for (std::size_t i = 0; i < map.plane_size(); ++i) {
            float& v = map.values[off + i];
            v = (map.valid[t] && range > 0) ? static_cast<float>((v - lo) / range) : 0.0f;
        }
    }
}

}  // namespace tcpvad
