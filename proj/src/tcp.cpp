#include "tcpvad/tcp.hpp"

#include <algorithm>
#include <string>

#include "tcpvad/error.hpp"
#include "tcpvad/parallel.hpp"

namespace tcpvad::tcp {

std::vector<VideoBlock> extract_blocks(const BinaryMapSequence& codes, const BlockParams& params) {
    const auto centers = window_centers(codes.frames, params.length, params.stride);
    const int half = params.length / 2;
    std::vector<VideoBlock> blocks;
    blocks.reserve(centers.size() * codes.grid.cells());
    for (int center : centers) {
        const int start = center - half;
        for (int r = 0; r < codes.grid.rows; ++r) {
            for (int c = 0; c < codes.grid.cols; ++c) {
                VideoBlock b;
                b.cell = r * codes.grid.cols + c;
                b.center = center;
                b.codes.reserve(params.length);
                for (int t = start; t < start + params.length; ++t) b.codes.push_back(codes.at(t, r, c));
                blocks.push_back(std::move(b));
            }
        }
    }
    return blocks;
}

BlockHistogram block_histogram(const VideoBlock& block, int bits) {
    if (bits < 1 || bits > 24) throw Error(Errc::InvalidArgument, "bits must lie in [1, 24]");
    BlockHistogram h;
    h.counts.assign(std::size_t{1} << bits, 0);
    for (auto code : block.codes) {
        if (code >= h.counts.size()) {
            throw Error(Errc::CodeOutOfRange, "code " + std::to_string(code) + " >= 2^" + std::to_string(bits));
        }
        ++h.counts[code];
        ++h.total;
    }
    return h;
}

double tcp_raw(const BlockHistogram& hist) {
    if (hist.total == 0 || hist.counts.empty()) throw Error(Errc::EmptyHistogram, "histogram has no mass");
    const auto dominant = *std::max_element(hist.counts.begin(), hist.counts.end());
    double sum = 0;
    for (auto c : hist.counts) {
        const double d = static_cast<double>(c) - static_cast<double>(dominant);
        sum += d * d;
    }
    return sum;
}

ScoreMapSequence tcp_raw_map(const BinaryMapSequence& codes, const BlockParams& params) {
    const auto centers = window_centers(codes.frames, params.length, params.stride);
    auto map = ScoreMapSequence::zeros(ScoreKind::RawTcp, codes.frames, codes.grid);
    map.valid = validity_from_centers(codes.frames, centers);
    const int half = params.length / 2;
    const std::size_t bins = std::size_t{1} << codes.bits;

    parallel_for(centers.size(), [&](std::size_t w) {
        const int center = centers[w];
        const int start = center - half;
        BlockHistogram h;
        for (int r = 0; r < codes.grid.rows; ++r) {
            for (int c = 0; c < codes.grid.cols; ++c) {
                h.counts.assign(bins, 0);
                h.total = 0;
                for (int t = start; t < start + params.length; ++t) {
                    const auto code = codes.at(t, r, c);
                    if (code >= bins) throw Error(Errc::CodeOutOfRange, "code " + std::to_string(code));
                    ++h.counts[code];
                    ++h.total;
                }
                map.at(center, r, c) = static_cast<float>(tcp_raw(h));
            }
        }
    });
    return map;
}

ScoreMapSequence normalize_scores(const ScoreMapSequence& raw, const ScoreParams& params) {
    if (raw.kind != ScoreKind::RawTcp) throw Error(Errc::InvalidArgument, "normalize_scores expects a raw TCP map");
    if (!(params.bg_threshold >= 0 && params.bg_threshold <= 1)) {
        throw Error(Errc::InvalidArgument, "bg_threshold must lie in [0,1]");
    }
    ScoreMapSequence out = raw;
    out.kind = ScoreKind::NormalizedTcp;

    // A constant raw map carries no information: all scores 0 in either orientation.
    bool constant = true;
    bool seen = false;
    float first = 0;
    for (int t = 0; t < raw.frames && constant; ++t) {
        if (!raw.valid[t]) continue;
        const auto off = raw.frame_offset(t);
        for (std::size_t i = 0; i < raw.plane_size(); ++i) {
            if (!seen) {
                first = raw.values[off + i];
                seen = true;
            } else if (raw.values[off + i] != first) {
                constant = false;
                break;
            }
        }
    }
    if (constant) {
        std::fill(out.values.begin(), out.values.end(), 0.0f);
        return out;
    }

    minmax_normalize(out);
    for (int t = 0; t < out.frames; ++t) {
        if (!out.valid[t]) continue;
        const auto off = out.frame_offset(t);
        for (std::size_t i = 0; i < out.plane_size(); ++i) {
            float& v = out.values[off + i];
            if (params.orientation == Orientation::Inverted) v = 1.0f - v;
            if (v < params.bg_threshold) v = 0.0f;
        }
    }
    fill_boundary(out, params.boundary);
    return out;
}

ScoreMapSequence tcp_map_sequence(const BinaryMapSequence& codes, const BlockParams& block, const ScoreParams& score) {
    return normalize_scores(tcp_raw_map(codes, block), score);
}

ScoreMapSequence upsample_map(const ScoreMapSequence& map, int height, int width) {
    if (map.grid.height != height || map.grid.width != width) {
        throw Error(Errc::DimensionMismatch, "target " + std::to_string(width) + "x" + std::to_string(height) +
                                                 " differs from the grid's frame size");
    }
    GridSpec full{height, width, height, width};
    auto out = ScoreMapSequence::zeros(map.kind, map.frames, full);
    out.valid = map.valid;
    for (int t = 0; t < map.frames; ++t) {
        for (int r = 0; r < map.grid.rows; ++r) {
            for (int c = 0; c < map.grid.cols; ++c) {
                const float v = map.at(t, r, c);
                const auto rect = map.grid.cell(r, c);
                for (int y = rect.row0; y < rect.row1; ++y)
                    for (int x = rect.col0; x < rect.col1; ++x) out.at(t, y, x) = v;
            }
        }
    }
    return out;
}

std::vector<double> frame_signal(const ScoreMapSequence& map) {
    std::vector<double> signal(static_cast<std::size_t>(map.frames), 0.0);
    for (int t = 0; t < map.frames; ++t) {
        const auto off = map.frame_offset(t);
        double s = 0;
        for (std::size_t i = 0; i < map.plane_size(); ++i) s += map.values[off + i];
        signal[t] = s;
    }
    if (signal.empty()) return signal;
    const auto [lo, hi] = std::minmax_element(signal.begin(), signal.end());
    const double min = *lo, range = *hi - *lo;
    for (auto& s : signal) s = range > 0 ? (s - min) / range : 0.0;
    return signal;
}

}  // namespace tcpvad::tcp
