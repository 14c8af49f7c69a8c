#include "tcpvad/fusion.hpp"

#include <string>

#include "tcpvad/error.hpp"

namespace tcpvad::fusion {

namespace {

void require_unit_range(const ScoreMapSequence& m, const char* name) {
    for (float v : m.values) {
        if (!(v >= 0.0f && v <= 1.0f)) {
            throw Error(Errc::UnnormalizedInput, std::string(name) + " map has value " + std::to_string(v));
        }
    }
}

}  // namespace

void FusionWeights::validate() const {
    if (!(alpha >= 0) || !(beta >= 0) || !(alpha + beta > 0)) {
        throw Error(Errc::InvalidArgument, "fusion weights must be non-negative with a positive sum");
    }
}

ScoreMapSequence fuse_maps(const ScoreMapSequence& flow, const ScoreMapSequence& tcp, const FusionWeights& weights) {
    weights.validate();
    if (flow.frames != tcp.frames || flow.grid.rows != tcp.grid.rows || flow.grid.cols != tcp.grid.cols ||
        flow.values.size() != tcp.values.size()) {
        throw Error(Errc::DimensionMismatch, "flow and tcp maps differ in shape");
    }
    require_unit_range(flow, "flow");
    require_unit_range(tcp, "tcp");

    ScoreMapSequence out = tcp;
    out.kind = ScoreKind::Fused;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = static_cast<float>(weights.alpha * flow.values[i] + weights.beta * tcp.values[i]);
    }
    for (std::size_t t = 0; t < out.valid.size(); ++t) out.valid[t] = flow.valid[t] && tcp.valid[t];
    return out;
}

}  // namespace tcpvad::fusion
