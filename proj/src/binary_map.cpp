#include "tcpvad/binary_map.hpp"

#include <cmath>
#include <string>

#include "tcpvad/error.hpp"

namespace tcpvad {

void BinaryMapSequence::validate() const {
    if (bits < 1 || bits > 24) throw Error(Errc::InvalidArgument, "bits must lie in [1, 24]");
    if (codes.size() != static_cast<std::size_t>(frames) * grid.cells()) {
        throw Error(Errc::DimensionMismatch, "code count does not match T x grid");
    }
    for (auto c : codes) {
        if (c >= code_count()) throw Error(Errc::CodeOutOfRange, "code " + std::to_string(c) + " >= 2^" + std::to_string(bits));
    }
}

io::Tensor BinaryMapSequence::to_tensor() const {
    std::vector<std::uint32_t> dims{static_cast<std::uint32_t>(frames), static_cast<std::uint32_t>(grid.rows),
                                    static_cast<std::uint32_t>(grid.cols)};
    if (bits <= 8) return io::Tensor::from_u8(std::move(dims), {codes.begin(), codes.end()});
    std::vector<float> v(codes.begin(), codes.end());
    return io::Tensor::from_f32(std::move(dims), std::move(v));
}

BinaryMapSequence BinaryMapSequence::from_tensor(const io::Tensor& tensor, int bits, int frame_height, int frame_width) {
    if (tensor.dims.size() != 3) throw Error(Errc::DimensionMismatch, "code tensor must have dims (T,H_g,W_g)");
    BinaryMapSequence m;
    m.frames = static_cast<int>(tensor.dims[0]);
    m.grid = GridSpec{static_cast<int>(tensor.dims[1]), static_cast<int>(tensor.dims[2]), frame_height, frame_width};
    m.grid.validate();
    m.bits = bits;
    if (tensor.dtype == io::DType::U8) {
        m.codes.assign(tensor.u8.begin(), tensor.u8.end());
    } else {
        m.codes.reserve(tensor.f32.size());
        for (float v : tensor.f32) {
            if (!(v >= 0) || v != std::floor(v)) throw Error(Errc::CodeOutOfRange, "non-integral code value");
            m.codes.push_back(static_cast<std::uint32_t>(v));
        }
    }
    m.validate();
    return m;
}

}  // namespace tcpvad
