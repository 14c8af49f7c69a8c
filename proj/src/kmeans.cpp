#include "tcpvad/kmeans.hpp"

#include <bit>
#include <cstring>
#include <limits>
#include <random>
#include <string>

#include "tcpvad/error.hpp"
#include "tcpvad/parallel.hpp"
#include "tcpvad/tensor_io.hpp"

namespace tcpvad::quant {

namespace {

constexpr char kMagic[4] = {'K', 'M', 'C', '1'};

template <typename Row>
std::pair<std::uint32_t, double> nearest(const Row& x, const Eigen::MatrixXd& centroids) {
    std::uint32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
        double d = 0;
        for (Eigen::Index j = 0; j < centroids.cols(); ++j) {
            const double diff = static_cast<double>(x[j]) - centroids(k, j);
            d += diff * diff;
        }
        if (d < best_d) {
            best_d = d;
            best = static_cast<std::uint32_t>(k);
        }
    }
    return {best, best_d};
}

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& samples, int k, std::mt19937_64& rng) {
    const auto n = samples.rows();
    Eigen::MatrixXd centroids(k, samples.cols());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto pick_uniform = [&] { return std::min<Eigen::Index>(static_cast<Eigen::Index>(unit(rng) * n), n - 1); };

    centroids.row(0) = samples.row(pick_uniform());
    Eigen::VectorXd dist(n);
    for (Eigen::Index i = 0; i < n; ++i) dist[i] = (samples.row(i) - centroids.row(0)).squaredNorm();

    for (int c = 1; c < k; ++c) {
        const double total = dist.sum();
        Eigen::Index chosen = 0;
        if (total > 0) {
            const double target = unit(rng) * total;
            double acc = 0;
            chosen = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += dist[i];
                if (acc > target && dist[i] > 0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick_uniform();  // fewer distinct points than centroids
        }
        centroids.row(c) = samples.row(chosen);
        for (Eigen::Index i = 0; i < n; ++i) {
            dist[i] = std::min(dist[i], (samples.row(i) - centroids.row(c)).squaredNorm());
        }
    }
    return centroids;
}

}  // namespace

std::vector<std::uint8_t> Codebook::serialize() const {
    io::ByteWriter w;
    for (char c : kMagic) w.put_u8(static_cast<std::uint8_t>(c));
    w.put_u32(static_cast<std::uint32_t>(size()));
    w.put_u32(static_cast<std::uint32_t>(dim()));
    for (Eigen::Index i = 0; i < centroids.rows(); ++i)
        for (Eigen::Index j = 0; j < centroids.cols(); ++j) w.put_f32(static_cast<float>(centroids(i, j)));
    return w.take();
}

Codebook Codebook::deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw Error(Errc::BadMagic, "not a KMC1 codebook");
    }
    io::ByteReader r(bytes);
    r.get_bytes(4);
    const auto k = r.get_u32();
    const auto d = r.get_u32();
    if (k < 2 || !std::has_single_bit(k) || k > (1u << 24) || d < 1) {
        throw Error(Errc::DimensionMismatch, "invalid codebook dimensions");
    }
    Codebook cb;
    cb.bits = std::countr_zero(k);
    cb.centroids.resize(k, d);
    for (std::uint32_t i = 0; i < k; ++i)
        for (std::uint32_t j = 0; j < d; ++j) cb.centroids(i, j) = r.get_f32();
    if (r.remaining() != 0) throw Error(Errc::TruncatedPayload, "trailing bytes after codebook");
    return cb;
}

void Codebook::save(const std::filesystem::path& path) const { io::write_file(path, serialize()); }

Codebook Codebook::load(const std::filesystem::path& path) { return deserialize(io::read_file(path)); }

KMeansResult kmeans_codebook(const Eigen::MatrixXd& samples, int k, const KMeansOptions& options) {
    if (k < 2 || !std::has_single_bit(static_cast<unsigned>(k))) {
        throw Error(Errc::InvalidArgument, "k must be a power of two >= 2");
    }
    if (samples.rows() < k) {
        throw Error(Errc::TooFewSamples, std::to_string(samples.rows()) + " samples for k=" + std::to_string(k));
    }
    if (!samples.allFinite()) throw Error(Errc::InvalidArgument, "samples contain non-finite values");

    std::mt19937_64 rng(options.seed);
    KMeansResult result;
    Codebook& cb = result.codebook;
    cb.bits = std::countr_zero(static_cast<unsigned>(k));
    cb.centroids = seed_plus_plus(samples, k, rng);

    const auto n = static_cast<std::size_t>(samples.rows());
    std::vector<std::uint32_t> labels(n, 0);
    std::vector<double> dists(n, 0);
    for (int it = 0; it < std::max(options.iterations, 1); ++it) {
        parallel_for(n, [&](std::size_t i) {
            auto [label, d] = nearest(samples.row(static_cast<Eigen::Index>(i)), cb.centroids);
            labels[i] = label;
            dists[i] = d;
        });
        double sse = 0;
        for (double d : dists) sse += d;
        result.sse.push_back(sse);
        if (it + 1 >= options.iterations) break;

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, samples.cols());
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums.row(labels[i]) += samples.row(static_cast<Eigen::Index>(i));
            ++counts[labels[i]];
        }
        // Empty clusters keep their previous centroid.
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0) cb.centroids.row(c) = sums.row(c) / static_cast<double>(counts[c]);
    }
    return result;
}

std::uint32_t assign_code(std::span<const float> x, const Codebook& codebook) {
    if (static_cast<int>(x.size()) != codebook.dim()) throw Error(Errc::DimensionMismatch, "feature length mismatch");
    return nearest(x, codebook.centroids).first;
}

std::uint32_t assign_code(std::span<const double> x, const Codebook& codebook) {
    if (static_cast<int>(x.size()) != codebook.dim()) throw Error(Errc::DimensionMismatch, "feature length mismatch");
    return nearest(x, codebook.centroids).first;
}

BinaryMapSequence encode_sequence(const FeatureMapSequence& features, const Codebook& codebook) {
    if (features.dim != codebook.dim()) throw Error(Errc::DimensionMismatch, "feature dimension mismatch");
    BinaryMapSequence out;
    out.frames = features.frames;
    out.grid = features.grid;
    out.bits = codebook.bits;
    out.codes.assign(features.vectors(), 0);
    parallel_for(static_cast<std::size_t>(features.frames), [&](std::size_t t) {
        const int ti = static_cast<int>(t);
        for (int r = 0; r < features.grid.rows; ++r)
            for (int c = 0; c < features.grid.cols; ++c) out.at(ti, r, c) = assign_code(features.at(ti, r, c), codebook);
    });
    return out;
}

}  // namespace tcpvad::quant
