#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tcpvad/binary_map.hpp"
#include "tcpvad/features.hpp"

namespace tcpvad::quant {

/// K = 2^bits centroids, one per row. Used in place of the hash model for
/// the clustering ablation: a vector's code is its nearest centroid.
struct Codebook {
    Eigen::MatrixXd centroids;
    int bits = 0;

    int size() const noexcept { return static_cast<int>(centroids.rows()); }
    int dim() const noexcept { return static_cast<int>(centroids.cols()); }

    // "KMC1", u32 K, u32 D, centroids row-major LE f32.
    std::vector<std::uint8_t> serialize() const;
    static Codebook deserialize(std::span<const std::uint8_t> bytes);
    void save(const std::filesystem::path& path) const;
    static Codebook load(const std::filesystem::path& path);
};

struct KMeansOptions {
    int iterations = 50;
    std::uint64_t seed = 0;
};

struct KMeansResult {
    Codebook codebook;
    std::vector<double> sse;  // within-cluster SSE after each assignment step
};

/// Lloyd's algorithm from a k-means++ seeding. `k` must be a power of two.
KMeansResult kmeans_codebook(const Eigen::MatrixXd& samples, int k, const KMeansOptions& options = {});

/// Nearest centroid under L2; ties go to the lowest index.
std::uint32_t assign_code(std::span<const float> x, const Codebook& codebook);
std::uint32_t assign_code(std::span<const double> x, const Codebook& codebook);

BinaryMapSequence encode_sequence(const FeatureMapSequence& features, const Codebook& codebook);

}  // namespace tcpvad::quant
