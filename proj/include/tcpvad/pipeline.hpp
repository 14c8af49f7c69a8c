#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "tcpvad/config.hpp"

namespace tcpvad::pipeline {

// Fixed artifact names inside a run directory.
namespace artifact {
inline constexpr const char* kFrames = "frames";
inline constexpr const char* kMasks = "masks.fmap";
inline constexpr const char* kLabels = "labels.txt";
inline constexpr const char* kFeatures = "features.fmap";
inline constexpr const char* kHashModel = "model.itq";
inline constexpr const char* kCodebook = "codebook.kmc";
inline constexpr const char* kCodes = "codes.fmap";
inline constexpr const char* kTcpRaw = "tcpraw.fmap";
inline constexpr const char* kTcpMap = "tcpmap.fmap";
inline constexpr const char* kFlowMap = "flowmap.fmap";
inline constexpr const char* kMseg = "mseg.fmap";
inline constexpr const char* kResults = "results.csv";
inline constexpr const char* kResultsPixel = "results_pixel.csv";
inline constexpr const char* kSignal = "signal.csv";
inline constexpr const char* kSummary = "summary.json";
inline constexpr const char* kHeatmaps = "heatmaps";
}  // namespace artifact

struct Metrics {
    double frame_auc = 0;
    double frame_eer = 0;
    std::optional<double> pixel_auc;
    std::optional<double> pixel_eer;

    std::string to_json() const;
    std::string to_text() const;
};

/// Exclusive ownership of a run directory for the lifetime of the object.
class RunDirLock {
public:
    explicit RunDirLock(const std::filesystem::path& run_dir);
    ~RunDirLock();
    RunDirLock(const RunDirLock&) = delete;
    RunDirLock& operator=(const RunDirLock&) = delete;

private:
    std::filesystem::path path_;
};

// Each stage reads its inputs from and writes its outputs to `run_dir`.
void stage_synth(const PipelineConfig& cfg, const std::filesystem::path& run_dir);
void stage_features(const PipelineConfig& cfg, const std::filesystem::path& run_dir);
void stage_itq_train(const PipelineConfig& cfg, const std::filesystem::path& run_dir);
void stage_encode(const PipelineConfig& cfg, const std::filesystem::path& run_dir);
void stage_tcp(const PipelineConfig& cfg, const std::filesystem::path& run_dir);
void stage_flow(const PipelineConfig& cfg, const std::filesystem::path& run_dir);
void stage_fuse(const PipelineConfig& cfg, const std::filesystem::path& run_dir);
Metrics stage_eval(const PipelineConfig& cfg, const std::filesystem::path& run_dir);

/// synth-or-load, features, train, encode, tcp, flow, fuse, eval.
Metrics run_all(const PipelineConfig& cfg, const std::filesystem::path& run_dir);

}  // namespace tcpvad::pipeline
