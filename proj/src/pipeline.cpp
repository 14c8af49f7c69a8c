#include "tcpvad/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <iostream>
#include "json.hpp"

#include "tcpvad/binary_map.hpp"
#include "tcpvad/error.hpp"
#include "tcpvad/eval.hpp"
#include "tcpvad/features.hpp"
#include "tcpvad/frames.hpp"
#include "tcpvad/itq.hpp"
#include "tcpvad/kmeans.hpp"
#include "tcpvad/tensor_io.hpp"

namespace fs = std::filesystem;

namespace tcpvad::pipeline {

namespace {

void log(std::string_view stage, const std::string& msg) { std::cerr << "[" << stage << "] " << msg << "\n"; }

template <typename Fn>
auto with_stage(std::string_view stage, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        std::string msg = e.what();
        const auto prefix = std::string(to_string(e.code())) + ": ";
        if (msg.starts_with(prefix)) msg.erase(0, prefix.size());
        throw Error(e.code(), std::string(stage) + ": " + msg);
    } catch (const fs::filesystem_error& e) {
        throw Error(Errc::IoError, std::string(stage) + ": " + e.what());
    }
}

std::string after_prefix(const std::string& s) { return s.substr(s.find(':') + 1); }

void require(const fs::path& p, std::string_view producer) {
    if (!fs::exists(p)) {
        throw Error(Errc::IoError, p.string() + " not found (run '" + std::string(producer) + "' first)");
    }
}

io::FrameSequence load_frames(const PipelineConfig& cfg, const fs::path& run_dir) {
    io::FrameSequence frames;
    if (cfg.frames == "synth") {
        require(run_dir / artifact::kFrames, "synth");
        frames = io::load_frame_sequence(run_dir / artifact::kFrames, "*.pgm");
    } else {
        frames = io::load_frame_sequence(after_prefix(cfg.frames), cfg.frame_pattern);
    }
    if (cfg.resize_width > 0) frames = io::resize_frames(frames, cfg.resize_width, cfg.resize_height);
    return frames;
}

io::GroundTruth load_truth(const PipelineConfig& cfg, const fs::path& run_dir, int frames, int height, int width) {
    io::GroundTruth gt;
    if (cfg.frames == "synth") {
        require(run_dir / artifact::kMasks, "synth");
        gt.pixel_masks = io::read_masks(run_dir / artifact::kMasks);
        gt.frame_labels = io::read_labels(run_dir / artifact::kLabels);
    } else {
        if (!cfg.masks.empty()) gt = io::GroundTruth::from_masks(io::read_masks(cfg.masks));
        if (!cfg.labels.empty()) gt.frame_labels = io::read_labels(cfg.labels);
        if (gt.frame_labels.empty()) throw Error(Errc::InvalidArgument, "no ground truth configured (masks or labels)");
    }
    if (gt.frame_labels.size() != static_cast<std::size_t>(frames)) {
        throw Error(Errc::LengthMismatch, std::to_string(gt.frame_labels.size()) + " labels for " +
                                              std::to_string(frames) + " frames");
    }
    if (gt.has_masks() && cfg.resize_width > 0 &&
        (gt.pixel_masks.front().width != width || gt.pixel_masks.front().height != height)) {
        io::FrameSequence m;
        m.frames = std::move(gt.pixel_masks);
        gt.pixel_masks = io::resize_frames(m, width, height).frames;
        for (auto& mask : gt.pixel_masks)
            for (auto& p : mask.pixels) p = p >= 128 ? 255 : 0;
    }
    gt.validate(height, width);
    return gt;
}

FeatureMapSequence load_features(const PipelineConfig& cfg, const fs::path& run_dir) {
    const auto frames = load_frames(cfg, run_dir);
    FeatureMapSequence fm;
    if (cfg.features == "toy") {
        const auto path = run_dir / artifact::kFeatures;
        if (!fs::exists(path)) stage_features(cfg, run_dir);
        fm = FeatureMapSequence::from_tensor(io::read_tensor(path), frames.height(), frames.width());
    } else {
        fm = FeatureMapSequence::from_tensor(io::read_tensor(after_prefix(cfg.features)), frames.height(),
                                             frames.width());
    }
    if (fm.frames != static_cast<int>(frames.size())) {
        throw Error(Errc::LengthMismatch, "feature maps cover " + std::to_string(fm.frames) + " frames, video has " +
                                              std::to_string(frames.size()));
    }
    if (cfg.normalize_features) quant::l2_normalize(fm);
    return fm;
}

BinaryMapSequence load_codes(const PipelineConfig& cfg, const fs::path& run_dir, int height, int width) {
    require(run_dir / artifact::kCodes, "encode");
    return BinaryMapSequence::from_tensor(io::read_tensor(run_dir / artifact::kCodes), cfg.bits, height, width);
}

void dump_heatmaps(const ScoreMapSequence& mseg, const fs::path& dir) {
    fs::create_directories(dir);
    char name[32];
    for (int t = 0; t < mseg.frames; ++t) {
        io::Image img(mseg.grid.cols, mseg.grid.rows);
        const auto off = mseg.frame_offset(t);
        for (std::size_t i = 0; i < img.pixels.size(); ++i) {
            img.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(mseg.values[off + i], 0.0f, 1.0f) * 255));
        }
        std::snprintf(name, sizeof name, "%05d.pgm", t);
        io::write_pgm(dir / name, img);
    }
}

void write_text(const fs::path& path, const std::string& text) {
    io::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

std::string Metrics::to_json() const {
    nlohmann::ordered_json j;
    j["frame_auc"] = frame_auc;
    j["frame_eer"] = frame_eer;
    if (pixel_auc) {
        j["pixel_auc"] = *pixel_auc;
        j["pixel_eer"] = *pixel_eer;
    }
    return j.dump(2);
}

std::string Metrics::to_text() const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "frame-level AUC %.4f EER %.4f\n", frame_auc, frame_eer);
    std::string out = buf;
    if (pixel_auc) {
        std::snprintf(buf, sizeof buf, "pixel-level AUC %.4f EER %.4f\n", *pixel_auc, *pixel_eer);
        out += buf;
    }
    return out;
}

RunDirLock::RunDirLock(const fs::path& run_dir) : path_(run_dir / ".lock") {
    fs::create_directories(run_dir);
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        throw Error(Errc::IoError, "run directory " + run_dir.string() + " is locked (remove " + path_.string() +
                                       " if no other run is active)");
    }
    ::close(fd);
}

RunDirLock::~RunDirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
}

void stage_synth(const PipelineConfig& cfg, const fs::path& run_dir) {
    with_stage("synth", [&] {
        if (cfg.frames != "synth") {
            log("synth", "frames come from " + cfg.frames + "; nothing to generate");
            return;
        }
        auto spec = cfg.synth;
        spec.seed = cfg.seed;
        const auto video = io::generate_synthetic(spec);
        fs::remove_all(run_dir / artifact::kFrames);
        io::write_frame_sequence(run_dir / artifact::kFrames, video.frames);
        io::write_masks(run_dir / artifact::kMasks, video.truth.pixel_masks);
        io::write_labels(run_dir / artifact::kLabels, video.truth.frame_labels);
        log("synth", std::to_string(video.frames.size()) + " frames " + std::to_string(spec.width) + "x" +
                         std::to_string(spec.height) + ", anomaly from frame " + std::to_string(spec.anomaly_onset));
    });
}

void stage_features(const PipelineConfig& cfg, const fs::path& run_dir) {
    with_stage("features", [&] {
        if (cfg.features != "toy") {
            log("features", "using external feature maps " + after_prefix(cfg.features));
            return;
        }
        const auto frames = load_frames(cfg, run_dir);
        const auto fm = io::extract_toy_features(frames, cfg.grid_rows, cfg.grid_cols);
        io::write_tensor(run_dir / artifact::kFeatures, fm.to_tensor());
        log("features", "toy descriptors on a " + std::to_string(cfg.grid_rows) + "x" + std::to_string(cfg.grid_cols) +
                            " grid");
    });
}

void stage_itq_train(const PipelineConfig& cfg, const fs::path& run_dir) {
    with_stage("itq-train", [&] {
        const auto fm = load_features(cfg, run_dir);
        const auto samples = quant::sample_vectors(fm, cfg.itq_max_samples, cfg.seed, cfg.train_frames);
        if (cfg.quantizer == QuantizerKind::Itq) {
            const auto result = quant::itq_train(samples, cfg.bits, {cfg.itq_iters, cfg.seed});
            result.model.save(run_dir / artifact::kHashModel);
            char buf[128];
            std::snprintf(buf, sizeof buf, "%lld samples, %d bits, quantization loss %.6g -> %.6g",
                          static_cast<long long>(samples.rows()), cfg.bits, result.trace.losses.front(),
                          result.trace.losses.back());
            log("itq-train", buf);
        } else {
            const auto result = quant::kmeans_codebook(samples, 1 << cfg.bits, {cfg.kmeans_iters, cfg.seed});
            result.codebook.save(run_dir / artifact::kCodebook);
            log("itq-train", "k-means codebook with " + std::to_string(1 << cfg.bits) + " centroids");
        }
    });
}

void stage_encode(const PipelineConfig& cfg, const fs::path& run_dir) {
    with_stage("encode", [&] {
        const auto fm = load_features(cfg, run_dir);
        BinaryMapSequence codes;
        if (cfg.quantizer == QuantizerKind::Itq) {
            require(run_dir / artifact::kHashModel, "itq-train");
            const auto model = quant::HashModel::load(run_dir / artifact::kHashModel);
            if (model.bits != cfg.bits) throw Error(Errc::DimensionMismatch, "model bits differ from config");
            codes = quant::encode_sequence(fm, model);
        } else {
            require(run_dir / artifact::kCodebook, "itq-train");
            const auto cb = quant::Codebook::load(run_dir / artifact::kCodebook);
            if (cb.bits != cfg.bits) throw Error(Errc::DimensionMismatch, "codebook size differs from config");
            codes = quant::encode_sequence(fm, cb);
        }
        io::write_tensor(run_dir / artifact::kCodes, codes.to_tensor());
        log("encode", std::to_string(codes.frames) + " binary maps");
    });
}

void stage_tcp(const PipelineConfig& cfg, const fs::path& run_dir) {
    with_stage("tcp", [&] {
        const auto frames = load_frames(cfg, run_dir);
        const auto codes = load_codes(cfg, run_dir, frames.height(), frames.width());
        const auto raw = tcp::tcp_raw_map(codes, cfg.block);
        const auto map = tcp::normalize_scores(raw, cfg.score);
        io::write_tensor(run_dir / artifact::kTcpRaw, raw.to_tensor());
        io::write_tensor(run_dir / artifact::kTcpMap, map.to_tensor());
        log("tcp", "block length " + std::to_string(cfg.block.length) + ", stride " + std::to_string(cfg.block.stride));
    });
}

void stage_flow(const PipelineConfig& cfg, const fs::path& run_dir) {
    with_stage("flow", [&] {
        const auto frames = load_frames(cfg, run_dir);
        std::vector<flow::FlowField> fields;
        if (cfg.flow_source == "builtin") {
            fields = flow::compute_flow_sequence(frames, cfg.flow);
        } else {
            fields = flow::read_external_flow(after_prefix(cfg.flow_source));
            if (fields.size() + 1 != frames.size()) {
                throw Error(Errc::DimensionMismatch, std::to_string(fields.size()) + " flow fields for " +
                                                         std::to_string(frames.size()) + " frames");
            }
            for (const auto& f : fields) {
                if (f.width != frames.width() || f.height != frames.height()) {
                    throw Error(Errc::DimensionMismatch, "external flow size differs from the frames");
                }
            }
        }
        std::vector<flow::ScalarField> mags;
        mags.reserve(fields.size());
        for (const auto& f : fields) mags.push_back(flow::flow_magnitude(f));

        // Align with the code grid so flow and TCP maps share dims.
        const auto codes = load_codes(cfg, run_dir, frames.height(), frames.width());
        const auto map = flow::aggregate_flow_blocks(mags, codes.grid, cfg.block, cfg.score.boundary);
        io::write_tensor(run_dir / artifact::kFlowMap, map.to_tensor());
        log("flow", std::to_string(fields.size()) + " frame pairs (" + cfg.flow_source + ")");
    });
}

void stage_fuse(const PipelineConfig& cfg, const fs::path& run_dir) {
    with_stage("fuse", [&] {
        const auto frames = load_frames(cfg, run_dir);
        const int h = frames.height(), w = frames.width();
        require(run_dir / artifact::kTcpMap, "tcp");
        require(run_dir / artifact::kFlowMap, "flow");
        const auto tcp_map = ScoreMapSequence::from_tensor(io::read_tensor(run_dir / artifact::kTcpMap),
                                                           ScoreKind::NormalizedTcp, h, w);
        const auto flow_map =
            ScoreMapSequence::from_tensor(io::read_tensor(run_dir / artifact::kFlowMap), ScoreKind::Flow, h, w);
        const auto mseg =
            fusion::fuse_maps(tcp::upsample_map(flow_map, h, w), tcp::upsample_map(tcp_map, h, w), cfg.weights);
        io::write_tensor(run_dir / artifact::kMseg, mseg.to_tensor());
        if (cfg.dump_heatmaps) dump_heatmaps(mseg, run_dir / artifact::kHeatmaps);
        log("fuse", "alpha " + std::to_string(cfg.weights.alpha) + ", beta " + std::to_string(cfg.weights.beta));
    });
}

Metrics stage_eval(const PipelineConfig& cfg, const fs::path& run_dir) {
    return with_stage("eval", [&] {
        const auto frames = load_frames(cfg, run_dir);
        const int h = frames.height(), w = frames.width();
        require(run_dir / artifact::kMseg, "fuse");
        const auto mseg = ScoreMapSequence::from_tensor(io::read_tensor(run_dir / artifact::kMseg), ScoreKind::Fused, h, w);
        const auto truth = load_truth(cfg, run_dir, mseg.frames, h, w);

        Metrics m;
        const auto frame_curve = eval::frame_level_roc(mseg, truth);
        eval::export_results(frame_curve, run_dir / artifact::kResults, run_dir / "results.svg");
        m.frame_auc = frame_curve.auc;
        m.frame_eer = frame_curve.eer;
        if (truth.has_masks()) {
            const auto pixel_curve = eval::pixel_level_roc(mseg, truth);
            eval::export_results(pixel_curve, run_dir / artifact::kResultsPixel, run_dir / "results_pixel.svg");
            m.pixel_auc = pixel_curve.auc;
            m.pixel_eer = pixel_curve.eer;
        }

        // Per-frame abnormality indicator from the TCP maps.
        if (fs::exists(run_dir / artifact::kTcpMap)) {
            const auto tcp_map = ScoreMapSequence::from_tensor(io::read_tensor(run_dir / artifact::kTcpMap),
                                                               ScoreKind::NormalizedTcp, h, w);
            const auto signal = tcp::frame_signal(tcp_map);
            std::string text = "frame,signal,label\n";
            char buf[64];
            for (std::size_t t = 0; t < signal.size(); ++t) {
                std::snprintf(buf, sizeof buf, "%zu,%.9g,%d\n", t, signal[t], truth.frame_labels[t] ? 1 : 0);
                text += buf;
            }
            write_text(run_dir / artifact::kSignal, text);
        }
        write_text(run_dir / artifact::kSummary, m.to_json() + "\n");
        return m;
    });
}

Metrics run_all(const PipelineConfig& cfg, const fs::path& run_dir) {
    cfg.validate();
    fs::create_directories(run_dir);
    stage_synth(cfg, run_dir);
    stage_features(cfg, run_dir);
    stage_itq_train(cfg, run_dir);
    stage_encode(cfg, run_dir);
    stage_tcp(cfg, run_dir);
    stage_flow(cfg, run_dir);
    stage_fuse(cfg, run_dir);
    return stage_eval(cfg, run_dir);
}

}  // namespace tcpvad::pipeline
