#include "tcpvad/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "tcpvad/error.hpp"

namespace tcpvad::io {

namespace {

constexpr char kMagic[4] = {'F', 'M', 'A', 'P'};

std::size_t dtype_size(DType dtype) { return dtype == DType::F32 ? 4 : 1; }

std::size_t product(std::span<const std::uint32_t> dims) {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

}  // namespace

void ByteWriter::put_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }

void ByteReader::need(std::size_t n) const {
    if (remaining() < n) throw Error(Errc::TruncatedPayload, "unexpected end of data");
}

std::uint8_t ByteReader::get_u8() {
    need(1);
    return bytes_[pos_++];
}

std::uint32_t ByteReader::get_u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
}

float ByteReader::get_f32() { return std::bit_cast<float>(get_u32()); }

std::span<const std::uint8_t> ByteReader::get_bytes(std::size_t n) {
    need(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::size_t Tensor::element_count() const noexcept { return product(dims); }

Tensor Tensor::from_f32(std::vector<std::uint32_t> dims, std::vector<float> values) {
    Tensor t;
    t.dtype = DType::F32;
    t.dims = std::move(dims);
    t.f32 = std::move(values);
    if (t.dims.empty() || t.f32.size() != t.element_count()) {
        throw Error(Errc::DimensionMismatch, "payload length does not match dims");
    }
    return t;
}

Tensor Tensor::from_u8(std::vector<std::uint32_t> dims, std::vector<std::uint8_t> values) {
    Tensor t;
    t.dtype = DType::U8;
    t.dims = std::move(dims);
    t.u8 = std::move(values);
    if (t.dims.empty() || t.u8.size() != t.element_count()) {
        throw Error(Errc::DimensionMismatch, "payload length does not match dims");
    }
    return t;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor) {
    const std::size_t n = tensor.element_count();
    if (tensor.dims.empty()) throw Error(Errc::InvalidArgument, "tensor rank must be at least 1");
    const std::size_t have = tensor.dtype == DType::F32 ? tensor.f32.size() : tensor.u8.size();
    if (have != n) throw Error(Errc::DimensionMismatch, "payload length does not match dims");

    ByteWriter w;
    for (char c : kMagic) w.put_u8(static_cast<std::uint8_t>(c));
    w.put_u8(kFmapVersion);
    w.put_u8(static_cast<std::uint8_t>(tensor.dtype));
    w.put_u32(static_cast<std::uint32_t>(tensor.dims.size()));
    for (auto d : tensor.dims) w.put_u32(d);
    if (tensor.dtype == DType::F32) {
        for (float v : tensor.f32) w.put_f32(v);
    } else {
        w.put_bytes(tensor.u8);
    }
    return w.take();
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    if (r.remaining() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw Error(Errc::BadMagic, "not an FMAP file");
    }
    r.get_bytes(4);
    const auto version = r.get_u8();
    if (version != kFmapVersion) {
        throw Error(Errc::UnsupportedVersion, "FMAP version " + std::to_string(version));
    }
    const auto dtype_raw = r.get_u8();
    if (dtype_raw > 1) throw Error(Errc::UnsupportedVersion, "unknown dtype " + std::to_string(dtype_raw));

    Tensor t;
    t.dtype = static_cast<DType>(dtype_raw);
    const auto rank = r.get_u32();
    if (rank == 0) throw Error(Errc::TruncatedPayload, "rank 0 tensor");
    if (static_cast<std::size_t>(rank) * 4 > r.remaining()) throw Error(Errc::TruncatedPayload, "dims truncated");
    t.dims.reserve(rank);
    for (std::uint32_t i = 0; i < rank; ++i) t.dims.push_back(r.get_u32());

    // Guard the size product against overflow before trusting it.
    std::size_t n = 1;
    for (auto d : t.dims) {
        if (d != 0 && n > std::numeric_limits<std::size_t>::max() / 8 / d) {
            throw Error(Errc::TruncatedPayload, "dims too large");
        }
        n *= d;
    }
    const std::size_t payload = n * dtype_size(t.dtype);
    if (r.remaining() < payload) throw Error(Errc::TruncatedPayload, "payload shorter than dims require");

    if (t.dtype == DType::F32) {
        t.f32.resize(n);
        for (auto& v : t.f32) v = r.get_f32();
    } else {
        auto b = r.get_bytes(n);
        t.u8.assign(b.begin(), b.end());
    }
    if (r.remaining() != 0) throw Error(Errc::TruncatedPayload, "trailing bytes after payload");
    return t;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(Errc::IoError, "read failed on " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    // Write-then-rename so readers never observe a partial file.
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::IoError, "cannot open " + tmp.string() + " for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(Errc::IoError, "write failed on " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(Errc::IoError, "cannot rename onto " + path.string() + ": " + ec.message());
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
    write_file(path, encode_tensor(tensor));
}

void write_tensor(const std::filesystem::path& path, std::span<const std::uint32_t> dims, DType dtype,
                  std::span<const std::uint8_t> payload) {
    if (dims.empty()) throw Error(Errc::InvalidArgument, "dims must be nonempty");
    if (payload.size() != product(dims) * dtype_size(dtype)) {
        throw Error(Errc::DimensionMismatch, "payload length does not match dims");
    }
    ByteWriter w;
    for (char c : kMagic) w.put_u8(static_cast<std::uint8_t>(c));
    w.put_u8(kFmapVersion);
    w.put_u8(static_cast<std::uint8_t>(dtype));
    w.put_u32(static_cast<std::uint32_t>(dims.size()));
    for (auto d : dims) w.put_u32(d);
    if (dtype == DType::F32 && std::endian::native != std::endian::little) {
        for (std::size_t i = 0; i < payload.size(); i += 4) {
            std::uint32_t v;
            std::memcpy(&v, payload.data() + i, 4);
            w.put_u32(v);
        }
    } else {
        w.put_bytes(payload);
    }
    write_file(path, w.take());
}

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

}  // namespace tcpvad::io
