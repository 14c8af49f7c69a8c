#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tcpvad/frames.hpp"
#include "tcpvad/score_map.hpp"

namespace tcpvad::eval {

struct RocPoint {
    double threshold = 0;
    double fpr = 0;
    double tpr = 0;

    bool operator==(const RocPoint&) const = default;
};

/// Points ordered by threshold, descending, so FPR and TPR never decrease
/// along the vector. The (0,0) anchor carries threshold +inf and the (1,1)
/// anchor -inf.
struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0;
    double eer = 0;
};

/// Trapezoidal area under TPR(FPR).
double auc(std::span<const RocPoint> points);
/// FPR at the linearly interpolated crossing of TPR = 1 - FPR.
double eer(std::span<const RocPoint> points);

/// 256 evenly spaced values in [0,1] plus every distinct value of `scores`,
/// sorted descending.
std::vector<double> default_thresholds(std::span<const double> scores);

/// Builds a curve from per-threshold (fpr, tpr) pairs, adds the anchors and
/// attaches AUC/EER.
RocCurve make_curve(std::vector<RocPoint> points);

/// Frame protocol: frame t is flagged at threshold th iff its maximum score
/// is >= th. Empty `thresholds` selects default_thresholds(frame maxima).
RocCurve frame_level_roc(const ScoreMapSequence& mseg, const io::GroundTruth& truth,
                         std::span<const double> thresholds = {});

enum class FrameOutcome : std::uint8_t { TruePositive, FalsePositive, FalseNegative, TrueNegative };

/// Localization verdict for one frame. An abnormal frame is a true positive
/// when the detection covers at least 40% of its ground-truth pixels; a
/// detection that falls short is a false positive. Any detection on a
/// normal frame is a false positive.
FrameOutcome classify_localization(std::span<const std::uint8_t> detection, std::span<const std::uint8_t> truth_mask,
                                   bool abnormal);

/// Pixel protocol at full frame resolution. TPR = true positives / abnormal
/// frames; FPR = flagged normal frames / normal frames.
RocCurve pixel_level_roc(const ScoreMapSequence& mseg, const io::GroundTruth& truth,
                         std::span<const double> thresholds = {});

/// CSV: header "threshold,fpr,tpr", one row per point, then "auc,<v>" and
/// "eer,<v>". Values printed with 9 significant digits. An SVG polyline plot
/// is written alongside when `svg_path` is nonempty.
void export_results(const RocCurve& curve, const std::filesystem::path& csv_path,
                    const std::filesystem::path& svg_path = {});
RocCurve import_results(const std::filesystem::path& csv_path);

}  // namespace tcpvad::eval
