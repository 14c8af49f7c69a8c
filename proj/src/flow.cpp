#include "tcpvad/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcpvad/error.hpp"
#include "tcpvad/parallel.hpp"
#include "tcpvad/tensor_io.hpp"

namespace tcpvad::flow {

namespace {

struct Plane {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    Plane() = default;
    Plane(int w, int h, float fill = 0.0f) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    float& operator()(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    float operator()(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    float clamped(int x, int y) const {
        return (*this)(std::clamp(x, 0, width - 1), std::clamp(y, 0, height - 1));
    }
    float bilinear(double x, double y) const {
        x = std::clamp(x, 0.0, width - 1.0);
        y = std::clamp(y, 0.0, height - 1.0);
        const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
        const int x1 = std::min(x0 + 1, width - 1), y1 = std::min(y0 + 1, height - 1);
        const double ax = x - x0, ay = y - y0;
        return static_cast<float>((1 - ay) * ((1 - ax) * (*this)(x0, y0) + ax * (*this)(x1, y0)) +
                                  ay * ((1 - ax) * (*this)(x0, y1) + ax * (*this)(x1, y1)));
    }
};

Plane to_plane(const io::Image& img) {
    Plane p(img.width, img.height);
    std::transform(img.pixels.begin(), img.pixels.end(), p.data.begin(), [](auto v) { return static_cast<float>(v); });
    return p;
}

// Separable [1 4 6 4 1] / 16 binomial blur with replicated borders.
Plane blur(const Plane& in) {
    static constexpr float k[5] = {1 / 16.f, 4 / 16.f, 6 / 16.f, 4 / 16.f, 1 / 16.f};
    Plane tmp(in.width, in.height), out(in.width, in.height);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            float s = 0;
            for (int i = -2; i <= 2; ++i) s += k[i + 2] * in.clamped(x + i, y);
            tmp(x, y) = s;
        }
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            float s = 0;
            for (int i = -2; i <= 2; ++i) s += k[i + 2] * tmp.clamped(x, y + i);
            out(x, y) = s;
        }
    return out;
}

Plane resample(const Plane& in, int width, int height) {
    Plane out(width, height);
    const double sx = static_cast<double>(in.width) / width;
    const double sy = static_cast<double>(in.height) / height;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) out(x, y) = in.bilinear((x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
    return out;
}

std::vector<Plane> build_pyramid(const Plane& base, const FlowParams& params) {
    std::vector<Plane> pyr{base};
    for (int l = 1; l < params.levels; ++l) {
        const auto& prev = pyr.back();
        const int w = static_cast<int>(std::lround(prev.width * params.scale));
        const int h = static_cast<int>(std::lround(prev.height * params.scale));
        if (w < 4 || h < 4) break;
        pyr.push_back(resample(blur(prev), w, h));
    }
    return pyr;
}

// Horn-Schunck neighbourhood average (1/6 edge neighbours, 1/12 diagonals).
float local_mean(const Plane& p, int x, int y) {
    return (p.clamped(x - 1, y) + p.clamped(x + 1, y) + p.clamped(x, y - 1) + p.clamped(x, y + 1)) / 6.0f +
           (p.clamped(x - 1, y - 1) + p.clamped(x + 1, y - 1) + p.clamped(x - 1, y + 1) + p.clamped(x + 1, y + 1)) /
               12.0f;
}

void refine_level(const Plane& first, const Plane& second, Plane& u, Plane& v, const FlowParams& params) {
    const int w = first.width, h = first.height;
    Plane warped(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) warped(x, y) = second.bilinear(x + u(x, y), y + v(x, y));

    Plane ix(w, h), iy(w, h), it(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            ix(x, y) = 0.25f * (first.clamped(x + 1, y) - first.clamped(x - 1, y) + warped.clamped(x + 1, y) -
                                warped.clamped(x - 1, y));
            iy(x, y) = 0.25f * (first.clamped(x, y + 1) - first.clamped(x, y - 1) + warped.clamped(x, y + 1) -
                                warped.clamped(x, y - 1));
            it(x, y) = warped(x, y) - first(x, y);
        }
    }

    const Plane u0 = u, v0 = v;
    const float alpha2 = static_cast<float>(params.smoothness * params.smoothness);
    Plane un(w, h), vn(w, h);
    for (int iter = 0; iter < params.iterations; ++iter) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const float ub = local_mean(u, x, y);
                const float vb = local_mean(v, x, y);
                const float gx = ix(x, y), gy = iy(x, y);
                const float residual = gx * (ub - u0(x, y)) + gy * (vb - v0(x, y)) + it(x, y);
                const float k = residual / (alpha2 + gx * gx + gy * gy);
                un(x, y) = ub - gx * k;
                vn(x, y) = vb - gy * k;
            }
        }
        std::swap(u.data, un.data);
        std::swap(v.data, vn.data);
    }
}

}  // namespace

FlowField FlowField::zeros(int width, int height) {
    FlowField f;
    f.width = width;
    f.height = height;
    f.u.assign(static_cast<std::size_t>(width) * height, 0.0f);
    f.v.assign(static_cast<std::size_t>(width) * height, 0.0f);
    return f;
}

void FlowParams::validate() const {
    if (!(smoothness > 0)) throw Error(Errc::InvalidArgument, "flow smoothness must be positive");
    if (levels < 1) throw Error(Errc::InvalidArgument, "flow levels must be at least 1");
    if (!(scale > 0 && scale < 1)) throw Error(Errc::InvalidArgument, "flow scale must lie in (0,1)");
    if (iterations < 0) throw Error(Errc::InvalidArgument, "flow iterations must be non-negative");
}

FlowField compute_flow(const io::Image& first, const io::Image& second, const FlowParams& params) {
    params.validate();
    if (first.width != second.width || first.height != second.height) {
        throw Error(Errc::DimensionMismatch, "flow frames differ in size");
    }
    const auto pyr1 = build_pyramid(to_plane(first), params);
    const auto pyr2 = build_pyramid(to_plane(second), params);

    Plane u(pyr1.back().width, pyr1.back().height), v(pyr1.back().width, pyr1.back().height);
    for (int l = static_cast<int>(pyr1.size()) - 1; l >= 0; --l) {
        const auto& a = pyr1[l];
        if (u.width != a.width || u.height != a.height) {
            const float fx = static_cast<float>(a.width) / u.width;
            const float fy = static_cast<float>(a.height) / u.height;
            u = resample(u, a.width, a.height);
            v = resample(v, a.width, a.height);
            for (auto& x : u.data) x *= fx;
            for (auto& x : v.data) x *= fy;
        }
        refine_level(a, pyr2[l], u, v, params);
    }

    FlowField out;
    out.width = first.width;
    out.height = first.height;
    out.u = std::move(u.data);
    out.v = std::move(v.data);
    return out;
}

std::vector<FlowField> compute_flow_sequence(const io::FrameSequence& frames, const FlowParams& params) {
    frames.validate();
    params.validate();
    std::vector<FlowField> out(frames.size() - 1);
    parallel_for(out.size(), [&](std::size_t t) { out[t] = compute_flow(frames.frames[t], frames.frames[t + 1], params); });
    return out;
}

ScalarField flow_magnitude(const FlowField& field) {
    ScalarField m;
    m.width = field.width;
    m.height = field.height;
    m.values.resize(field.u.size());
    for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] = std::hypot(field.u[i], field.v[i]);
    return m;
}

ScoreMapSequence aggregate_flow_raw(std::span<const ScalarField> magnitudes, const GridSpec& grid,
                                    const tcp::BlockParams& block) {
    grid.validate();
    const int frames = static_cast<int>(magnitudes.size()) + 1;
    const auto centers = window_centers(frames, block.length, block.stride);
    for (const auto& m : magnitudes) {
        if (m.width != grid.width || m.height != grid.height) {
            throw Error(Errc::DimensionMismatch, "flow magnitude size differs from the grid's frame size");
        }
    }

    // Mean magnitude per (pair, cell).
    const int pairs = frames - 1;
    std::vector<double> cell_mean(static_cast<std::size_t>(pairs) * grid.cells(), 0.0);
    for (int p = 0; p < pairs; ++p) {
        const auto& m = magnitudes[p];
        for (int r = 0; r < grid.rows; ++r) {
            for (int c = 0; c < grid.cols; ++c) {
                const auto rect = grid.cell(r, c);
                double s = 0;
                for (int y = rect.row0; y < rect.row1; ++y)
                    for (int x = rect.col0; x < rect.col1; ++x) s += m.values[static_cast<std::size_t>(y) * m.width + x];
                cell_mean[static_cast<std::size_t>(p) * grid.cells() + r * grid.cols + c] = s / rect.area();
            }
        }
    }

    auto map = ScoreMapSequence::zeros(ScoreKind::Flow, frames, grid);
    map.valid = validity_from_centers(frames, centers);
    const int half = block.length / 2;
    for (int center : centers) {
        const int start = center - half;
        for (int cell = 0; cell < grid.cells(); ++cell) {
            double s = 0;
            for (int p = start; p < start + block.length - 1; ++p) s += cell_mean[static_cast<std::size_t>(p) * grid.cells() + cell];
            map.values[map.frame_offset(center) + cell] = static_cast<float>(s);
        }
    }
    return map;
}

ScoreMapSequence aggregate_flow_blocks(std::span<const ScalarField> magnitudes, const GridSpec& grid,
                                       const tcp::BlockParams& block, BoundaryMode boundary) {
    auto map = aggregate_flow_raw(magnitudes, grid, block);
    minmax_normalize(map);
    fill_boundary(map, boundary);
    return map;
}

std::vector<FlowField> read_external_flow(const std::filesystem::path& path) {
    const auto t = io::read_tensor(path);
    if (t.dtype != io::DType::F32 || t.dims.size() != 4 || t.dims[3] != 2) {
        throw Error(Errc::DimensionMismatch, "external flow must be f32 with dims (T-1,H,W,2)");
    }
    const int n = static_cast<int>(t.dims[0]);
    const int h = static_cast<int>(t.dims[1]);
    const int w = static_cast<int>(t.dims[2]);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    std::vector<FlowField> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        auto f = FlowField::zeros(w, h);
        const float* src = t.f32.data() + static_cast<std::size_t>(i) * plane * 2;
        for (std::size_t p = 0; p < plane; ++p) {
            f.u[p] = src[2 * p];
            f.v[p] = src[2 * p + 1];
            if (!std::isfinite(f.u[p]) || !std::isfinite(f.v[p])) {
                throw Error(Errc::InvalidArgument, "external flow contains non-finite values");
            }
        }
        out.push_back(std::move(f));
    }
    return out;
}

void write_flow(const std::filesystem::path& path, std::span<const FlowField> fields) {
    if (fields.empty()) throw Error(Errc::InvalidArgument, "no flow fields to write");
    const auto w = static_cast<std::uint32_t>(fields.front().width);
    const auto h = static_cast<std::uint32_t>(fields.front().height);
    std::vector<float> payload;
    payload.reserve(fields.size() * w * h * 2);
    for (const auto& f : fields) {
        if (static_cast<std::uint32_t>(f.width) != w || static_cast<std::uint32_t>(f.height) != h) {
            throw Error(Errc::DimensionMismatch, "flow fields differ in size");
        }
        for (std::size_t p = 0; p < f.u.size(); ++p) {
            payload.push_back(f.u[p]);
            payload.push_back(f.v[p]);
        }
    }
    io::write_tensor(path, io::Tensor::from_f32({static_cast<std::uint32_t>(fields.size()), h, w, 2}, std::move(payload)));
}

}  // namespace tcpvad::flow
