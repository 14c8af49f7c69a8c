#include "tcpvad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "tcpvad/error.hpp"
#include "tcpvad/tensor_io.hpp"

namespace tcpvad::eval {

namespace {

constexpr int kGridThresholds = 256;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<RocPoint> sorted_by_fpr(std::span<const RocPoint> points) {
    if (points.size() < 2) throw Error(Errc::DegenerateCurve, "need at least two ROC points");
    std::vector<RocPoint> p(points.begin(), points.end());
    for (const auto& q : p) {
        if (!std::isfinite(q.fpr) || !std::isfinite(q.tpr)) throw Error(Errc::DegenerateCurve, "non-finite ROC point");
    }
    std::stable_sort(p.begin(), p.end(), [](const RocPoint& a, const RocPoint& b) {
        return a.fpr < b.fpr || (a.fpr == b.fpr && a.tpr < b.tpr);
    });
    return p;
}

std::string fmt9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw Error(Errc::IoError, path.string() + ": malformed number '" + s + "'");
    }
    return v;
}

std::vector<double> frame_maxima(const ScoreMapSequence& mseg) {
    std::vector<double> m(static_cast<std::size_t>(mseg.frames));
    for (int t = 0; t < mseg.frames; ++t) m[t] = mseg.frame_max(t);
    return m;
}

void count_classes(const std::vector<std::uint8_t>& labels, std::size_t& positives, std::size_t& negatives) {
    positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw Error(Errc::DegenerateCurve, "ground truth needs both normal and abnormal frames");
    }
}

void write_svg(const RocCurve& curve, const std::filesystem::path& path) {
    constexpr int kSize = 400, kPad = 40;
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize + 2 * kPad << "\" height=\"" << kSize + 2 * kPad
      << "\">\n";
    s << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" fill=\"none\" stroke=\"#888\"/>\n";
    s << "<line x1=\"" << kPad << "\" y1=\"" << kPad + kSize << "\" x2=\"" << kPad + kSize << "\" y2=\"" << kPad
      << "\" stroke=\"#ccc\" stroke-dasharray=\"4\"/>\n";
    s << "<polyline fill=\"none\" stroke=\"#0a6\" stroke-width=\"2\" points=\"";
    for (const auto& p : sorted_by_fpr(curve.points)) {
        s << kPad + p.fpr * kSize << "," << kPad + (1 - p.tpr) * kSize << " ";
    }
    s << "\"/>\n";
    s << "<text x=\"" << kPad << "\" y=\"" << kPad - 12 << "\" font-family=\"sans-serif\" font-size=\"14\">AUC "
      << fmt9(curve.auc) << "  EER " << fmt9(curve.eer) << "</text>\n</svg>\n";
    const auto text = s.str();
    io::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

double auc(std::span<const RocPoint> points) {
    const auto p = sorted_by_fpr(points);
    double area = 0;
    for (std::size_t i = 1; i < p.size(); ++i) area += (p[i].fpr - p[i - 1].fpr) * (p[i].tpr + p[i - 1].tpr) / 2;
    return area;
}

double eer(std::span<const RocPoint> points) {
    const auto p = sorted_by_fpr(points);
    // g = TPR + FPR - 1 is zero where FPR equals the miss rate 1 - TPR.
    auto g = [](const RocPoint& q) { return q.tpr + q.fpr - 1; };
    if (g(p[0]) >= 0) return p[0].fpr;
    for (std::size_t i = 1; i < p.size(); ++i) {
        const double gi = g(p[i]);
        if (gi < 0) continue;
        const double gp = g(p[i - 1]);
        return p[i - 1].fpr + (p[i].fpr - p[i - 1].fpr) * (-gp) / (gi - gp);
    }
    throw Error(Errc::DegenerateCurve, "ROC curve never reaches TPR = 1 - FPR");
}

std::vector<double> default_thresholds(std::span<const double> scores) {
    std::vector<double> th;
    th.reserve(kGridThresholds + scores.size());
    for (int i = 0; i < kGridThresholds; ++i) th.push_back(static_cast<double>(i) / (kGridThresholds - 1));
    th.insert(th.end(), scores.begin(), scores.end());
    std::sort(th.begin(), th.end(), std::greater<>());
    th.erase(std::unique(th.begin(), th.end()), th.end());
    return th;
}

RocCurve make_curve(std::vector<RocPoint> points) {
    std::sort(points.begin(), points.end(), [](const RocPoint& a, const RocPoint& b) { return a.threshold > b.threshold; });
    RocCurve curve;
    curve.points.reserve(points.size() + 2);
    curve.points.push_back({kInf, 0.0, 0.0});
    curve.points.insert(curve.points.end(), points.begin(), points.end());
    curve.points.push_back({-kInf, 1.0, 1.0});
    curve.auc = auc(curve.points);
    curve.eer = eer(curve.points);
    return curve;
}

RocCurve frame_level_roc(const ScoreMapSequence& mseg, const io::GroundTruth& truth, std::span<const double> thresholds) {
    if (static_cast<std::size_t>(mseg.frames) != truth.frame_labels.size()) {
        throw Error(Errc::LengthMismatch, std::to_string(mseg.frames) + " scored frames vs " +
                                              std::to_string(truth.frame_labels.size()) + " labels");
    }
    std::size_t positives = 0, negatives = 0;
    count_classes(truth.frame_labels, positives, negatives);
    const auto scores = frame_maxima(mseg);
    const auto th = thresholds.empty() ? default_thresholds(scores) : std::vector<double>(thresholds.begin(), thresholds.end());

    std::vector<RocPoint> points;
    points.reserve(th.size());
    for (double theta : th) {
        std::size_t tp = 0, fp = 0;
        for (std::size_t t = 0; t < scores.size(); ++t) {
            if (scores[t] < theta) continue;
            (truth.frame_labels[t] ? tp : fp)++;
        }
        points.push_back({theta, static_cast<double>(fp) / negatives, static_cast<double>(tp) / positives});
    }
    return make_curve(std::move(points));
}

FrameOutcome classify_localization(std::span<const std::uint8_t> detection, std::span<const std::uint8_t> truth_mask,
                                   bool abnormal) {
    if (detection.size() != truth_mask.size()) throw Error(Errc::DimensionMismatch, "detection and mask differ in size");
    std::size_t flagged = 0, covered = 0, truth_pixels = 0;
    for (std::size_t i = 0; i < detection.size(); ++i) {
        const bool d = detection[i] != 0, g = truth_mask[i] != 0;
        flagged += d;
        truth_pixels += g;
        covered += d && g;
    }
    if (flagged == 0) return abnormal ? FrameOutcome::FalseNegative : FrameOutcome::TrueNegative;
    if (!abnormal) return FrameOutcome::FalsePositive;
    // covered / truth_pixels >= 40%, in integers.
    return covered * 5 >= truth_pixels * 2 ? FrameOutcome::TruePositive : FrameOutcome::FalsePositive;
}

RocCurve pixel_level_roc(const ScoreMapSequence& mseg, const io::GroundTruth& truth, std::span<const double> thresholds) {
    if (!truth.has_masks()) throw Error(Errc::MissingMasks, "pixel-level evaluation needs ground-truth masks");
    if (static_cast<std::size_t>(mseg.frames) != truth.frame_labels.size() ||
        truth.pixel_masks.size() != truth.frame_labels.size()) {
        throw Error(Errc::LengthMismatch, "score, label and mask counts differ");
    }
    for (const auto& m : truth.pixel_masks) {
        if (m.height != mseg.grid.rows || m.width != mseg.grid.cols) {
            throw Error(Errc::DimensionMismatch, "pixel evaluation needs scores at mask resolution");
        }
    }
    std::size_t positives = 0, negatives = 0;
    count_classes(truth.frame_labels, positives, negatives);

    // For an abnormal frame, the detection at threshold th covers >= 40% of
    // the truth pixels iff th <= the k-th largest truth-pixel score, with
    // k = ceil(0.4 n). Frames without truth pixels only need a detection.
    const auto maxima = frame_maxima(mseg);
    std::vector<double> critical(maxima.size(), -kInf);
    std::vector<float> inside;
    for (int t = 0; t < mseg.frames; ++t) {
        if (!truth.frame_labels[t]) continue;
        inside.clear();
        const auto& mask = truth.pixel_masks[t].pixels;
        const auto off = mseg.frame_offset(t);
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) inside.push_back(mseg.values[off + i]);
        if (inside.empty()) {
            critical[t] = maxima[t];
            continue;
        }
        const std::size_t k = (inside.size() * 2 + 4) / 5;
        std::nth_element(inside.begin(), inside.begin() + static_cast<std::ptrdiff_t>(k - 1), inside.end(), std::greater<>());
        critical[t] = inside[k - 1];
    }

    std::vector<double> th;
    if (thresholds.empty()) {
        std::vector<double> candidates = maxima;
        for (double c : critical)
            if (std::isfinite(c)) candidates.push_back(c);
        th = default_thresholds(candidates);
    } else {
        th.assign(thresholds.begin(), thresholds.end());
    }

    std::vector<RocPoint> points;
    points.reserve(th.size());
    for (double theta : th) {
        std::size_t tp = 0, fp = 0;
        for (int t = 0; t < mseg.frames; ++t) {
            if (truth.frame_labels[t]) {
                tp += critical[t] >= theta;
            } else {
                fp += maxima[t] >= theta;
            }
        }
        points.push_back({theta, static_cast<double>(fp) / negatives, static_cast<double>(tp) / positives});
    }
    return make_curve(std::move(points));
}

void export_results(const RocCurve& curve, const std::filesystem::path& csv_path, const std::filesystem::path& svg_path) {
    if (curve.points.size() < 2) throw Error(Errc::DegenerateCurve, "cannot export a curve with fewer than two points");
    std::string text = "threshold,fpr,tpr\n";
    for (const auto& p : curve.points) text += fmt9(p.threshold) + "," + fmt9(p.fpr) + "," + fmt9(p.tpr) + "\n";
    text += "auc," + fmt9(curve.auc) + "\n";
    text += "eer," + fmt9(curve.eer) + "\n";
    io::write_file(csv_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    if (!svg_path.empty()) write_svg(curve, svg_path);
}

RocCurve import_results(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw Error(Errc::IoError, "cannot open " + csv_path.string());
    std::string line;
    if (!std::getline(in, line) || line != "threshold,fpr,tpr") {
        throw Error(Errc::IoError, csv_path.string() + ": missing header");
    }
    RocCurve curve;
    bool have_auc = false, have_eer = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
        if (fields.size() == 2 && fields[0] == "auc") {
            curve.auc = parse_double(fields[1], csv_path);
            have_auc = true;
        } else if (fields.size() == 2 && fields[0] == "eer") {
            curve.eer = parse_double(fields[1], csv_path);
            have_eer = true;
        } else if (fields.size() == 3) {
            curve.points.push_back({parse_double(fields[0], csv_path), parse_double(fields[1], csv_path),
                                    parse_double(fields[2], csv_path)});
        } else {
            throw Error(Errc::IoError, csv_path.string() + ": malformed row '" + line + "'");
        }
    }
    if (!have_auc || !have_eer) throw Error(Errc::IoError, csv_path.string() + ": missing auc/eer rows");
    if (curve.points.size() < 2) throw Error(Errc::DegenerateCurve, "imported curve has fewer than two points");
    return curve;
}

}  // namespace tcpvad::eval
