#include "tcpvad/config.hpp"

#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "tcpvad/error.hpp"

namespace tcpvad {

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    throw Error(Errc::ConfigParseError,
                std::string(key) + " = '" + std::string(value) + "': expected " + std::string(expected));
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view v) {
    Int out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
    return out;
}

double parse_real(std::string_view key, std::string_view v) {
    const std::string s(v);
    char* end = nullptr;
    const double out = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(out)) bad_value(key, v, "a finite number");
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value(key, v, "true or false");
}

std::string fmt_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Field {
    std::function<void(PipelineConfig&, std::string_view key, std::string_view value)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

template <typename Int>
Field int_field(Int PipelineConfig::*member) {
    return {[member](PipelineConfig& c, std::string_view k, std::string_view v) { c.*member = parse_int<Int>(k, v); },
            [member](const PipelineConfig& c) { return std::to_string(c.*member); }};
}

template <typename Int, typename Sub>
Field nested_int(Sub PipelineConfig::*outer, Int Sub::*member) {
    return {[=](PipelineConfig& c, std::string_view k, std::string_view v) { (c.*outer).*member = parse_int<Int>(k, v); },
            [=](const PipelineConfig& c) { return std::to_string((c.*outer).*member); }};
}

template <typename Sub>
Field nested_real(Sub PipelineConfig::*outer, double Sub::*member) {
    return {[=](PipelineConfig& c, std::string_view k, std::string_view v) { (c.*outer).*member = parse_real(k, v); },
            [=](const PipelineConfig& c) { return fmt_real((c.*outer).*member); }};
}

Field string_field(std::string PipelineConfig::*member) {
    return {[member](PipelineConfig& c, std::string_view, std::string_view v) { c.*member = std::string(v); },
            [member](const PipelineConfig& c) { return c.*member; }};
}

const std::map<std::string, Field, std::less<>>& fields() {
    static const std::map<std::string, Field, std::less<>> table = [] {
        std::map<std::string, Field, std::less<>> t;
        t["bits"] = int_field(&PipelineConfig::bits);
        t["itq_iters"] = int_field(&PipelineConfig::itq_iters);
        t["itq_max_samples"] = int_field(&PipelineConfig::itq_max_samples);
        t["train_frames"] = int_field(&PipelineConfig::train_frames);
        t["normalize_features"] = {
            [](PipelineConfig& c, std::string_view k, std::string_view v) { c.normalize_features = parse_bool(k, v); },
            [](const PipelineConfig& c) { return std::string(c.normalize_features ? "true" : "false"); }};
        t["quantizer"] = {[](PipelineConfig& c, std::string_view k, std::string_view v) {
                              if (v == "itq") c.quantizer = QuantizerKind::Itq;
                              else if (v == "kmeans") c.quantizer = QuantizerKind::KMeans;
                              else bad_value(k, v, "itq or kmeans");
                          },
                          [](const PipelineConfig& c) {
                              return std::string(c.quantizer == QuantizerKind::Itq ? "itq" : "kmeans");
                          }};
        t["kmeans_iters"] = int_field(&PipelineConfig::kmeans_iters);
        t["seed"] = int_field(&PipelineConfig::seed);

        t["block_len"] = nested_int(&PipelineConfig::block, &tcp::BlockParams::length);
        t["block_stride"] = nested_int(&PipelineConfig::block, &tcp::BlockParams::stride);
        t["bg_threshold"] = nested_real(&PipelineConfig::score, &tcp::ScoreParams::bg_threshold);
        t["orientation"] = {[](PipelineConfig& c, std::string_view k, std::string_view v) {
                                if (v == "inverted") c.score.orientation = tcp::Orientation::Inverted;
                                else if (v == "literal") c.score.orientation = tcp::Orientation::Literal;
                                else bad_value(k, v, "inverted or literal");
                            },
                            [](const PipelineConfig& c) {
                                return std::string(c.score.orientation == tcp::Orientation::Inverted ? "inverted"
                                                                                                     : "literal");
                            }};
        t["boundary"] = {[](PipelineConfig& c, std::string_view k, std::string_view v) {
                             if (v == "zero") c.score.boundary = BoundaryMode::Zero;
                             else if (v == "replicate") c.score.boundary = BoundaryMode::Replicate;
                             else bad_value(k, v, "zero or replicate");
                         },
                         [](const PipelineConfig& c) {
                             return std::string(c.score.boundary == BoundaryMode::Zero ? "zero" : "replicate");
                         }};
        t["alpha"] = nested_real(&PipelineConfig::weights, &fusion::FusionWeights::alpha);
        t["beta"] = nested_real(&PipelineConfig::weights, &fusion::FusionWeights::beta);
        t["grid_rows"] = int_field(&PipelineConfig::grid_rows);
        t["grid_cols"] = int_field(&PipelineConfig::grid_cols);

        t["flow_smoothness"] = nested_real(&PipelineConfig::flow, &flow::FlowParams::smoothness);
        t["flow_levels"] = nested_int(&PipelineConfig::flow, &flow::FlowParams::levels);
        t["flow_scale"] = nested_real(&PipelineConfig::flow, &flow::FlowParams::scale);
        t["flow_iters"] = nested_int(&PipelineConfig::flow, &flow::FlowParams::iterations);

        t["frames"] = string_field(&PipelineConfig::frames);
        t["frame_pattern"] = string_field(&PipelineConfig::frame_pattern);
        t["features"] = string_field(&PipelineConfig::features);
        t["flow"] = string_field(&PipelineConfig::flow_source);
        t["masks"] = string_field(&PipelineConfig::masks);
        t["labels"] = string_field(&PipelineConfig::labels);
        t["resize"] = {[](PipelineConfig& c, std::string_view k, std::string_view v) {
                           if (v == "none") {
                               c.resize_width = c.resize_height = 0;
                               return;
                           }
                           const auto x = v.find('x');
                           if (x == std::string_view::npos) bad_value(k, v, "none or WIDTHxHEIGHT");
                           c.resize_width = parse_int<int>(k, v.substr(0, x));
                           c.resize_height = parse_int<int>(k, v.substr(x + 1));
                           if (c.resize_width < 1 || c.resize_height < 1) bad_value(k, v, "positive dimensions");
                       },
                       [](const PipelineConfig& c) {
                           return c.resize_width == 0 ? std::string("none")
                                                      : std::to_string(c.resize_width) + "x" +
                                                            std::to_string(c.resize_height);
                       }};

        t["synth_frames"] = nested_int(&PipelineConfig::synth, &io::SyntheticSpec::frames);
        t["synth_height"] = nested_int(&PipelineConfig::synth, &io::SyntheticSpec::height);
        t["synth_width"] = nested_int(&PipelineConfig::synth, &io::SyntheticSpec::width);
        t["synth_blobs"] = nested_int(&PipelineConfig::synth, &io::SyntheticSpec::normal_blobs);
        t["synth_normal_speed"] = nested_real(&PipelineConfig::synth, &io::SyntheticSpec::normal_speed);
        t["synth_anomaly_speed"] = nested_real(&PipelineConfig::synth, &io::SyntheticSpec::anomaly_speed);
        t["synth_onset"] = nested_int(&PipelineConfig::synth, &io::SyntheticSpec::anomaly_onset);
        t["synth_radius"] = nested_real(&PipelineConfig::synth, &io::SyntheticSpec::blob_radius);
        t["dump_heatmaps"] = {
            [](PipelineConfig& c, std::string_view k, std::string_view v) { c.dump_heatmaps = parse_bool(k, v); },
            [](const PipelineConfig& c) { return std::string(c.dump_heatmaps ? "true" : "false"); }};
        return t;
    }();
    return table;
}

bool has_prefix(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view value) {
    const auto& table = fields();
    auto it = table.find(key);
    if (it == table.end()) throw Error(Errc::ConfigParseError, "unknown key '" + std::string(key) + "'");
    it->second.set(*this, key, value);
}

void PipelineConfig::validate() const {
    auto bad = [](const std::string& why) { throw Error(Errc::ConfigParseError, why); };
    if (bits < 1 || bits > 24) bad("bits must lie in [1, 24]");
    if (itq_iters < 0 || kmeans_iters < 1) bad("iteration counts must be positive");
    if (itq_max_samples < 1) bad("itq_max_samples must be positive");
    if (train_frames < 0) bad("train_frames must be non-negative");
    if (block.length < 2 || block.stride < 1) bad("block_len must be >= 2 and block_stride >= 1");
    if (!(score.bg_threshold >= 0 && score.bg_threshold <= 1)) bad("bg_threshold must lie in [0,1]");
    if (!(weights.alpha >= 0) || !(weights.beta >= 0) || !(weights.alpha + weights.beta > 0)) {
        bad("alpha and beta must be non-negative with a positive sum");
    }
    if (weights.alpha + weights.beta > 1 + 1e-12) bad("alpha + beta must not exceed 1");
    if (grid_rows < 1 || grid_cols < 1) bad("grid dimensions must be positive");
    try {
        flow.validate();
    } catch (const Error& e) {
        bad(e.what());
    }
    if (frames != "synth" && !has_prefix(frames, "dir:")) bad("frames must be synth or dir:<path>");
    if (features != "toy" && !has_prefix(features, "fmap:")) bad("features must be toy or fmap:<path>");
    if (flow_source != "builtin" && !has_prefix(flow_source, "file:")) bad("flow must be builtin or file:<path>");
    if (frames == "synth") {
        try {
            synth.validate();
        } catch (const Error& e) {
            bad(e.what());
        }
    }
}

std::string PipelineConfig::to_text() const {
    std::string out;
    for (const auto& [key, field] : fields()) out += key + " = " + field.get(*this) + "\n";
    return out;
}

PipelineConfig PipelineConfig::parse(std::string_view text) {
    PipelineConfig cfg;
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(Errc::ConfigParseError, "line " + std::to_string(lineno) + ": expected key = value");
        }
        try {
            cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const Error& e) {
            throw Error(Errc::ConfigParseError, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const std::vector<std::string>& PipelineConfig::keys() {
    static const std::vector<std::string> k = [] {
        std::vector<std::string> out;
        for (const auto& [key, field] : fields()) out.push_back(key);
        return out;
    }();
    return k;
}

}  // namespace tcpvad
