#pragma once

#include "tcpvad/score_map.hpp"

namespace tcpvad::fusion {

struct FusionWeights {
    double alpha = 0.5;  // flow
    double beta = 0.5;   // tcp

    void validate() const;
};

/// mseg = alpha * flow + beta * tcp, pointwise. Both inputs must be
/// normalized to [0,1] and share dims.
ScoreMapSequence fuse_maps(const ScoreMapSequence& flow, const ScoreMapSequence& tcp, const FusionWeights& weights);

}  // namespace tcpvad::fusion
