#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tcpvad/error.hpp"
#include "tcpvad/features.hpp"
#include "tcpvad/parallel.hpp"

namespace tcpvad {

io::Tensor FeatureMapSequence::to_tensor() const {
    return io::Tensor::from_f32({static_cast<std::uint32_t>(frames), static_cast<std::uint32_t>(grid.rows),
                                 static_cast<std::uint32_t>(grid.cols), static_cast<std::uint32_t>(dim)},
                                values);
}

FeatureMapSequence FeatureMapSequence::from_tensor(const io::Tensor& tensor, int frame_height, int frame_width) {
    if (tensor.dtype != io::DType::F32 || tensor.dims.size() != 4) {
        throw Error(Errc::DimensionMismatch, "feature maps must be f32 with dims (T,H_g,W_g,D)");
    }
    FeatureMapSequence fm;
    fm.frames = static_cast<int>(tensor.dims[0]);
    fm.grid = GridSpec{static_cast<int>(tensor.dims[1]), static_cast<int>(tensor.dims[2]), frame_height, frame_width};
    fm.dim = static_cast<int>(tensor.dims[3]);
    if (fm.frames < 1 || fm.dim < 1) throw Error(Errc::DimensionMismatch, "empty feature tensor");
    fm.grid.validate();
    fm.values = tensor.f32;
    return fm;
}

namespace io {

namespace {

constexpr int kOrientationBins = 8;
// Central-difference gradient components are bounded by 127.5.
const double kMaxGradient = 127.5 * std::numbers::sqrt2;

void describe_cell(const Image& frame, const Image* previous, const CellRect& rc, std::span<float> out) {
    const double n = rc.area();
    double sum = 0, sum_sq = 0;
    double orient[kOrientationBins] = {};
    double pos_diff = 0, neg_diff = 0;
    double quad_sum[4] = {};
    int quad_n[4] = {};
    const int mid_r = rc.row0 + (rc.row1 - rc.row0) / 2;
    const int mid_c = rc.col0 + (rc.col1 - rc.col0) / 2;

    for (int y = rc.row0; y < rc.row1; ++y) {
        for (int x = rc.col0; x < rc.col1; ++x) {
            const double v = frame.at(x, y);
            sum += v;
            sum_sq += v * v;

            const int xl = std::max(x - 1, 0), xr = std::min(x + 1, frame.width - 1);
            const int yu = std::max(y - 1, 0), yd = std::min(y + 1, frame.height - 1);
            const double gx = 0.5 * (frame.at(xr, y) - frame.at(xl, y));
            const double gy = 0.5 * (frame.at(x, yd) - frame.at(x, yu));
            const double mag = std::hypot(gx, gy);
            if (mag > 0) {
                double angle = std::atan2(gy, gx);
                if (angle < 0) angle += std::numbers::pi;
                int bin = static_cast<int>(angle / std::numbers::pi * kOrientationBins);
                orient[std::min(bin, kOrientationBins - 1)] += mag;
            }

            if (previous) {
                const double d = v - previous->at(x, y);
                (d > 0 ? pos_diff : neg_diff) += std::abs(d);
            }

            // Cells one pixel wide or tall put everything in the lower/right quadrants.
            const int q = (y >= mid_r ? 2 : 0) + (x >= mid_c ? 1 : 0);
            quad_sum[q] += v;
            ++quad_n[q];
        }
    }

    const double mean = sum / n;
    const double var = std::max(sum_sq / n - mean * mean, 0.0);
    out[0] = static_cast<float>(mean / 255.0);
    out[1] = static_cast<float>(std::min(std::sqrt(var) / 127.5, 1.0));
    for (int b = 0; b < kOrientationBins; ++b) {
        out[2 + b] = static_cast<float>(std::min(orient[b] / (n * kMaxGradient), 1.0));
    }
    out[10] = static_cast<float>(pos_diff / (n * 255.0));
    out[11] = static_cast<float>(neg_diff / (n * 255.0));
    for (int q = 0; q < 4; ++q) {
        const double m = quad_n[q] ? quad_sum[q] / quad_n[q] : mean;
        out[12 + q] = static_cast<float>(m / 255.0);
    }
}

}  // namespace

FeatureMapSequence extract_toy_features(const FrameSequence& frames, int grid_rows, int grid_cols) {
    frames.validate();
    FeatureMapSequence fm;
    fm.frames = static_cast<int>(frames.size());
    fm.grid = GridSpec{grid_rows, grid_cols, frames.height(), frames.width()};
    fm.grid.validate();
    fm.dim = kToyFeatureDim;
    fm.values.assign(fm.vectors() * fm.dim, 0.0f);

    parallel_for(static_cast<std::size_t>(fm.frames), [&](std::size_t t) {
        const Image* prev = t > 0 ? &frames.frames[t - 1] : nullptr;
        for (int r = 0; r < fm.grid.rows; ++r) {
            for (int c = 0; c < fm.grid.cols; ++c) {
                describe_cell(frames.frames[t], prev, fm.grid.cell(r, c), fm.at(static_cast<int>(t), r, c));
            }
        }
    });
    return fm;
}

}  // namespace io
}  // namespace tcpvad
