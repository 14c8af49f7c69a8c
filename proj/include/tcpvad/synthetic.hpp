#pragma once

#include <cstdint>

#include "tcpvad/frames.hpp"

namespace tcpvad::io {

/// Seeded scene of slowly wandering dark blobs over a static textured
/// background. From `anomaly_onset` on, one extra bright blob moves through
/// the scene at `anomaly_speed`; its disk is the ground-truth mask.
struct SyntheticSpec {
    std::uint64_t seed = 7;
    int frames = 60;
    int height = 96;
    int width = 128;
    int normal_blobs = 3;
    double normal_speed = 1.0;   // px/frame
    double anomaly_speed = 5.0;  // px/frame
    int anomaly_onset = 30;
    double blob_radius = 8.0;  // px

    void validate() const;
};

struct SyntheticVideo {
    FrameSequence frames;
    GroundTruth truth;
};

SyntheticVideo generate_synthetic(const SyntheticSpec& spec);

}  // namespace tcpvad::io
