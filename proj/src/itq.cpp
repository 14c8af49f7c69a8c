#include "tcpvad/itq.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "tcpvad/error.hpp"
#include "tcpvad/parallel.hpp"
#include "tcpvad/tensor_io.hpp"

namespace tcpvad::quant {

namespace {

constexpr char kMagic[4] = {'I', 'T', 'Q', '1'};

// Eigenvalues below this fraction of the largest count as zero variance.
constexpr double kRankTolerance = 1e-10;

Eigen::MatrixXd sign_matrix(const Eigen::MatrixXd& m) {
    return m.unaryExpr([](double v) { return v > 0 ? 1.0 : -1.0; });
}

Eigen::MatrixXd random_orthogonal(int c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd g(c, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < c; ++i) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(c, c);
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix the QR sign ambiguity so the start depends only on the seed.
    for (int j = 0; j < c; ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;
    return q;
}

Eigen::MatrixXd procrustes_rotation(const Eigen::MatrixXd& b, const Eigen::MatrixXd& v) {
    const Eigen::MatrixXd m = b.transpose() * v;  // c x c
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXd r = svd.matrixV() * svd.matrixU().transpose();
    if (!r.allFinite()) throw Error(Errc::NonConvergentSvd, "Procrustes SVD produced non-finite values");
    return r;
}

void put_matrix(io::ByteWriter& w, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) w.put_f32(static_cast<float>(m(i, j)));
}

Eigen::MatrixXd get_matrix(io::ByteReader& r, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = r.get_f32();
    return m;
}

template <typename T>
std::uint32_t encode_impl(std::span<const T> x, const HashModel& model, const Eigen::MatrixXd& weights) {
    if (static_cast<int>(x.size()) != model.dim()) {
        throw Error(Errc::DimensionMismatch, "feature length " + std::to_string(x.size()) + " but model expects " +
                                                 std::to_string(model.dim()));
    }
    std::uint32_t code = 0;
    for (int i = 0; i < model.bits; ++i) {
        double z = 0;
        for (int d = 0; d < model.dim(); ++d) z += (static_cast<double>(x[d]) - model.mean[d]) * weights(d, i);
        if (!std::isfinite(z)) throw Error(Errc::InvalidArgument, "non-finite feature value");
        // Threshold rule: 0 when sigmoid(z) <= 0.5, else 1.
        if (sigmoid_minus_half(z) > 0) code |= 1u << i;
    }
    return code;
}

}  // namespace

std::vector<std::uint8_t> HashModel::serialize() const {
    io::ByteWriter w;
    for (char c : kMagic) w.put_u8(static_cast<std::uint8_t>(c));
    w.put_u32(static_cast<std::uint32_t>(dim()));
    w.put_u32(static_cast<std::uint32_t>(bits));
    for (Eigen::Index i = 0; i < mean.size(); ++i) w.put_f32(static_cast<float>(mean[i]));
    put_matrix(w, projection);
    put_matrix(w, rotation);
    return w.take();
}

HashModel HashModel::deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw Error(Errc::BadMagic, "not an ITQ1 hash model");
    }
    io::ByteReader r(bytes);
    r.get_bytes(4);
    const int d = static_cast<int>(r.get_u32());
    const int c = static_cast<int>(r.get_u32());
    if (d < 1 || c < 1 || c > d || c > 24) throw Error(Errc::DimensionMismatch, "invalid model dimensions");
    HashModel m;
    m.bits = c;
    m.mean.resize(d);
    for (int i = 0; i < d; ++i) m.mean[i] = r.get_f32();
    m.projection = get_matrix(r, d, c);
    m.rotation = get_matrix(r, c, c);
    if (r.remaining() != 0) throw Error(Errc::TruncatedPayload, "trailing bytes after hash model");
    return m;
}

void HashModel::save(const std::filesystem::path& path) const { io::write_file(path, serialize()); }

HashModel HashModel::load(const std::filesystem::path& path) { return deserialize(io::read_file(path)); }

ItqResult itq_train(const Eigen::MatrixXd& samples, int bits, const ItqOptions& options) {
    const auto n = samples.rows();
    const auto d = samples.cols();
    if (bits < 1 || bits > 24) throw Error(Errc::InvalidArgument, "bits must lie in [1, 24]");
    if (bits > d) throw Error(Errc::DimensionMismatch, "bits exceed feature dimension");
    if (n <= bits) throw Error(Errc::DegenerateData, "need more samples than bits");
    if (options.iterations < 0) throw Error(Errc::InvalidArgument, "iterations must be non-negative");
    if (!samples.allFinite()) throw Error(Errc::InvalidArgument, "samples contain non-finite values");

    ItqResult result;
    HashModel& model = result.model;
    model.bits = bits;
    model.mean = samples.colwise().mean().transpose();
    const Eigen::MatrixXd centered = samples.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw Error(Errc::NonConvergentSvd, "covariance eigendecomposition failed");
    // Eigen returns ascending eigenvalues; take the top `bits` in descending order.
    const Eigen::VectorXd& values = eig.eigenvalues();
    const double top = values[d - 1];
    if (!(top > 0) || values[d - bits] <= kRankTolerance * top) {
        throw Error(Errc::DegenerateData, "fewer than " + std::to_string(bits) + " directions with nonzero variance");
    }
    model.projection.resize(d, bits);
    for (int j = 0; j < bits; ++j) {
        Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - j);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0) v = -v;
        model.projection.col(j) = v;
    }

    const Eigen::MatrixXd projected = centered * model.projection;  // V
    Eigen::MatrixXd rotation = random_orthogonal(bits, options.seed);
    result.trace.rotations.push_back(rotation);
    Eigen::MatrixXd b = sign_matrix(projected * rotation);
    result.trace.losses.push_back((b - projected * rotation).norm());

    for (int it = 0; it < options.iterations; ++it) {
        rotation = procrustes_rotation(b, projected);
        const Eigen::MatrixXd vr = projected * rotation;
        result.trace.losses.push_back((b - vr).norm());
        result.trace.rotations.push_back(rotation);
        b = sign_matrix(vr);
    }
    model.rotation = rotation;
    return result;
}

Eigen::MatrixXd project_centered(const Eigen::MatrixXd& samples, const HashModel& model) {
    return (samples.rowwise() - model.mean.transpose()) * model.projection;
}

double sigmoid_minus_half(double z) noexcept {
    // sigmoid(z) - 1/2 = (1 - e^-z) / (2 (1 + e^-z)); expm1 keeps tiny |z| exact.
    const double a = std::abs(z);
    double r = -std::expm1(-a) / (2.0 * (1.0 + std::exp(-a)));
    if (r == 0 && a > 0) r = std::numeric_limits<double>::denorm_min();  // z/4 underflowed
    return std::copysign(r, z);
}

std::uint32_t encode_bits(std::span<const float> x, const HashModel& model) {
    return encode_impl(x, model, model.weights());
}

std::uint32_t encode_bits(std::span<const double> x, const HashModel& model) {
    return encode_impl(x, model, model.weights());
}

BinaryMapSequence encode_sequence(const FeatureMapSequence& features, const HashModel& model) {
    if (features.dim != model.dim()) {
        throw Error(Errc::DimensionMismatch, "feature dimension " + std::to_string(features.dim) +
                                                 " but model expects " + std::to_string(model.dim()));
    }
    BinaryMapSequence out;
    out.frames = features.frames;
    out.grid = features.grid;
    out.bits = model.bits;
    out.codes.assign(features.vectors(), 0);
    const Eigen::MatrixXd weights = model.weights();
    parallel_for(static_cast<std::size_t>(features.frames), [&](std::size_t t) {
        const int ti = static_cast<int>(t);
        for (int r = 0; r < features.grid.rows; ++r)
            for (int c = 0; c < features.grid.cols; ++c)
                out.at(ti, r, c) = encode_impl(features.at(ti, r, c), model, weights);
    });
    return out;
}

Eigen::MatrixXd sample_vectors(const FeatureMapSequence& features, std::size_t max_samples, std::uint64_t seed,
                               int frame_limit) {
    const int frames = frame_limit > 0 ? std::min(frame_limit, features.frames) : features.frames;
    const std::size_t total = static_cast<std::size_t>(frames) * features.grid.cells();
    const std::size_t keep = std::min(total, max_samples);
    if (keep == 0) throw Error(Errc::TooFewSamples, "no feature vectors to sample");

    // Algorithm R reservoir over vector indices, then sorted for a stable row order.
    std::vector<std::size_t> chosen(keep);
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = keep; i < total; ++i) {
        const std::size_t j = std::uniform_int_distribution<std::size_t>(0, i)(rng);
        if (j < keep) chosen[j] = i;
    }
    std::sort(chosen.begin(), chosen.end());

    Eigen::MatrixXd out(static_cast<Eigen::Index>(keep), features.dim);
    for (std::size_t row = 0; row < keep; ++row) {
        const float* v = features.values.data() + chosen[row] * features.dim;
        for (int d = 0; d < features.dim; ++d) out(static_cast<Eigen::Index>(row), d) = v[d];
    }
    return out;
}

void l2_normalize(FeatureMapSequence& features) {
    const auto dim = static_cast<std::size_t>(features.dim);
    for (std::size_t i = 0; i < features.vectors(); ++i) {
        float* v = features.values.data() + i * dim;
        double sq = 0;
        for (std::size_t d = 0; d < dim; ++d) sq += static_cast<double>(v[d]) * v[d];
        if (sq <= 0) continue;
        const double inv = 1.0 / std::sqrt(sq);
        for (std::size_t d = 0; d < dim; ++d) v[d] = static_cast<float>(v[d] * inv);
    }
}

}  // namespace tcpvad::quant
