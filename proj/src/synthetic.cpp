#include "tcpvad/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "tcpvad/error.hpp"

namespace tcpvad::io {

namespace {

struct Blob {
    double x = 0;
    double y = 0;
    double heading = 0;  // radians
    double speed = 0;
    double intensity = 0;
};

constexpr double kNormalIntensity = 40.0;
constexpr double kAnomalyIntensity = 235.0;
constexpr double kMaxTurn = 0.35;  // radians per frame for the random walk

// Advances a blob by its speed; reflects off the frame border so the disk stays inside.
void step(Blob& b, double radius, int width, int height, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> turn(-kMaxTurn, kMaxTurn);
    b.heading += turn(rng);
    double nx = b.x + b.speed * std::cos(b.heading);
    double ny = b.y + b.speed * std::sin(b.heading);
    const double lo_x = radius, hi_x = width - 1 - radius;
    const double lo_y = radius, hi_y = height - 1 - radius;
    if (nx < lo_x || nx > hi_x) {
        b.heading = std::numbers::pi - b.heading;
        nx = std::clamp(2 * std::clamp(nx, lo_x, hi_x) - nx, lo_x, hi_x);
    }
    if (ny < lo_y || ny > hi_y) {
        b.heading = -b.heading;
        ny = std::clamp(2 * std::clamp(ny, lo_y, hi_y) - ny, lo_y, hi_y);
    }
    b.x = nx;
    b.y = ny;
}

Blob spawn(double radius, int width, int height, double speed, double intensity, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ux(radius, width - 1 - radius);
    std::uniform_real_distribution<double> uy(radius, height - 1 - radius);
    std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
    Blob b;
    b.x = ux(rng);
    b.y = uy(rng);
    b.heading = angle(rng);
    b.speed = speed;
    b.intensity = intensity;
    return b;
}

std::vector<double> make_background(int width, int height, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
    std::uniform_real_distribution<double> freq(0.04, 0.16);
    struct Wave {
        double fx, fy, ph, amp;
    };
    std::vector<Wave> waves;
    for (int i = 0; i < 4; ++i) waves.push_back({freq(rng), freq(rng), phase(rng), 12.0});
    std::vector<double> bg(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double v = 120.0;
            for (const auto& w : waves) v += w.amp * std::sin(w.fx * x + w.fy * y + w.ph);
            bg[static_cast<std::size_t>(y) * width + x] = v;
        }
    }
    return bg;
}

// Antialiased disk coverage of pixel (x, y) for a blob of the given radius.
double coverage(const Blob& b, double radius, int x, int y) {
    const double d = std::hypot(x - b.x, y - b.y);
    return std::clamp(radius + 0.5 - d, 0.0, 1.0);
}

}  // namespace

void SyntheticSpec::validate() const {
    auto bad = [](const std::string& why) { throw Error(Errc::InvalidSpec, why); };
    if (frames < 1 || height < 1 || width < 1) bad("frames, height and width must be positive");
    if (normal_blobs < 0) bad("normal_blobs must be non-negative");
    if (!(normal_speed >= 0)) bad("normal_speed must be non-negative");
    if (!(anomaly_speed > normal_speed)) bad("anomaly_speed must exceed normal_speed");
    if (anomaly_onset < 0 || anomaly_onset >= frames) bad("anomaly_onset must lie in [0, frames)");
    if (!(blob_radius >= 1) || 2 * blob_radius + 2 > std::min(height, width)) {
        bad("blob_radius must be at least 1 and fit inside the frame");
    }
}

SyntheticVideo generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const int w = spec.width, h = spec.height;
    const double r = spec.blob_radius;

    const auto background = make_background(w, h, rng);
    std::vector<Blob> blobs;
    for (int i = 0; i < spec.normal_blobs; ++i) blobs.push_back(spawn(r, w, h, spec.normal_speed, kNormalIntensity, rng));
    Blob anomaly = spawn(r, w, h, spec.anomaly_speed, kAnomalyIntensity, rng);

    SyntheticVideo out;
    out.frames.frames.reserve(spec.frames);
    for (int t = 0; t < spec.frames; ++t) {
        if (t > 0) {
            for (auto& b : blobs) step(b, r, w, h, rng);
            if (t > spec.anomaly_onset) step(anomaly, r, w, h, rng);
        }
        const bool abnormal = t >= spec.anomaly_onset;

        Image frame(w, h);
        Image mask(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double v = background[static_cast<std::size_t>(y) * w + x];
                for (const auto& b : blobs) {
                    const double a = coverage(b, r, x, y);
                    v = (1 - a) * v + a * b.intensity;
                }
                if (abnormal) {
                    const double a = coverage(anomaly, r, x, y);
                    v = (1 - a) * v + a * anomaly.intensity;
                    if (std::hypot(x - anomaly.x, y - anomaly.y) <= r) mask.at(x, y) = 255;
                }
                frame.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
        out.frames.frames.push_back(std::move(frame));
        out.truth.frame_labels.push_back(abnormal);
        out.truth.pixel_masks.push_back(std::move(mask));
    }
    return out;
}

}  // namespace tcpvad::io
