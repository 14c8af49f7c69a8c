#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tcpvad/flow.hpp"
#include "tcpvad/fusion.hpp"
#include "tcpvad/synthetic.hpp"
#include "tcpvad/tcp.hpp"

namespace tcpvad {

enum class QuantizerKind : std::uint8_t { Itq, KMeans };

struct PipelineConfig {
    // Quantization
    int bits = 7;
    int itq_iters = 50;
    std::size_t itq_max_samples = 100000;
    int train_frames = 0;  // leading frames used for training, 0 = all
    bool normalize_features = false;
    QuantizerKind quantizer = QuantizerKind::Itq;
    int kmeans_iters = 50;
    std::uint64_t seed = 7;

    // Blocks and scores
    tcp::BlockParams block;
    tcp::ScoreParams score{tcp::Orientation::Inverted, 0.1, BoundaryMode::Replicate};
    fusion::FusionWeights weights;
    int grid_rows = 5;
    int grid_cols = 8;

    flow::FlowParams flow;

    // Sources: "synth" or "dir:<path>"; "toy" or "fmap:<path>"; "builtin" or "file:<path>".
    std::string frames = "synth";
    std::string frame_pattern = "*.pgm";
    std::string features = "toy";
    std::string flow_source = "builtin";
    std::string masks;   // FMAP u8 tensor or PGM directory, optional
    std::string labels;  // text file, optional
    int resize_width = 0;  // 0 = keep native size
    int resize_height = 0;

    io::SyntheticSpec synth;
    bool dump_heatmaps = false;

    /// Applies one key=value setting. Unknown keys and malformed values throw
    /// Errc::ConfigParseError.
    void set(std::string_view key, std::string_view value);
    /// Cross-field checks (weights sum, bits vs block etc.).
    void validate() const;

    /// Canonical key=value listing of every setting.
    std::string to_text() const;

    static PipelineConfig parse(std::string_view text);
    static PipelineConfig load(const std::filesystem::path& path);

    static const std::vector<std::string>& keys();
};

}  // namespace tcpvad
