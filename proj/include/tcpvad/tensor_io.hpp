#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace tcpvad::io {

enum class DType : std::uint8_t { F32 = 0, U8 = 1 };

/// In-memory FMAP v1 tensor. Exactly one of f32/u8 holds the payload,
/// selected by dtype, in row-major order with the last dimension innermost.
struct Tensor {
    DType dtype = DType::F32;
    std::vector<std::uint32_t> dims;
    std::vector<float> f32;
    std::vector<std::uint8_t> u8;

    std::size_t element_count() const noexcept;

    static Tensor from_f32(std::vector<std::uint32_t> dims, std::vector<float> values);
    static Tensor from_u8(std::vector<std::uint32_t> dims, std::vector<std::uint8_t> values);

    bool operator==(const Tensor&) const = default;
};

inline constexpr std::uint8_t kFmapVersion = 1;

// Layout: "FMAP", u8 version, u8 dtype, u32 rank, rank x u32 dims, payload.
// All multi-byte fields little-endian.
std::vector<std::uint8_t> encode_tensor(const Tensor& tensor);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& tensor);
void write_tensor(const std::filesystem::path& path, std::span<const std::uint32_t> dims, DType dtype,
                  std::span<const std::uint8_t> payload);
Tensor read_tensor(const std::filesystem::path& path);

// Shared by the other binary containers (hash model, codebook).
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

class ByteWriter {
public:
    void put_u8(std::uint8_t v) { bytes_.push_back(v); }
    void put_u32(std::uint32_t v);
    void put_f32(float v);
    void put_bytes(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
    std::uint8_t get_u8();
    std::uint32_t get_u32();
    float get_f32();
    std::span<const std::uint8_t> get_bytes(std::size_t n);
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const;
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace tcpvad::io
