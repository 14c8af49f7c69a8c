#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tcpvad/binary_map.hpp"
#include "tcpvad/features.hpp"

namespace tcpvad::quant {

/// Learned hash: code bits are the signs of (x - mean) * projection * rotation.
struct HashModel {
    Eigen::VectorXd mean;        // D
    Eigen::MatrixXd projection;  // D x c, orthonormal columns (top-c principal directions)
    Eigen::MatrixXd rotation;    // c x c orthogonal
    int bits = 0;

    int dim() const noexcept { return static_cast<int>(mean.size()); }
    /// Combined hashing weights, projection * rotation (D x c).
    Eigen::MatrixXd weights() const { return projection * rotation; }

    // "ITQ1", u32 D, u32 c, then mean, projection, rotation as row-major LE f32.
    std::vector<std::uint8_t> serialize() const;
    static HashModel deserialize(std::span<const std::uint8_t> bytes);
    void save(const std::filesystem::path& path) const;
    static HashModel load(const std::filesystem::path& path);
};

struct ItqOptions {
    int iterations = 50;
    std::uint64_t seed = 0;
};

/// rotations[0] is the random start; rotations[k] follows iteration k.
/// losses[0] = |sign(V R0) - V R0|_F and losses[k] = |sign(V R_{k-1}) - V R_k|_F.
struct ItqTrace {
    std::vector<double> losses;
    std::vector<Eigen::MatrixXd> rotations;
};

struct ItqResult {
    HashModel model;
    ItqTrace trace;
};

/// Iterative quantization on an n x D sample matrix (one sample per row).
ItqResult itq_train(const Eigen::MatrixXd& samples, int bits, const ItqOptions& options = {});

/// Centered projected samples V = (X - mean) * projection.
Eigen::MatrixXd project_centered(const Eigen::MatrixXd& samples, const HashModel& model);

/// sigmoid(z) - 1/2, evaluated so that its sign always equals the sign of z
/// (no rounding to exactly 1/2 for tiny |z|).
double sigmoid_minus_half(double z) noexcept;
inline double sigmoid(double z) noexcept { return 0.5 + sigmoid_minus_half(z); }

/// Binary quantization of one feature vector: bit i is 1 iff
/// sigmoid(z_i) > 1/2, with z = (x - mean) * W. Bit 0 is the least
/// significant bit of the returned code.
std::uint32_t encode_bits(std::span<const float> x, const HashModel& model);
std::uint32_t encode_bits(std::span<const double> x, const HashModel& model);

BinaryMapSequence encode_sequence(const FeatureMapSequence& features, const HashModel& model);

/// Seeded reservoir sample of at most `max_samples` feature vectors drawn
/// from the first `frame_limit` frames (0 = all frames), one per row.
Eigen::MatrixXd sample_vectors(const FeatureMapSequence& features, std::size_t max_samples, std::uint64_t seed,
                               int frame_limit = 0);

/// Scales every feature vector to unit L2 norm (zero vectors unchanged).
void l2_normalize(FeatureMapSequence& features);

}  // namespace tcpvad::quant
