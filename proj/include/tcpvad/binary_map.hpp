#pragma once

#include <cstdint>
#include <vector>

#include "tcpvad/grid.hpp"
#include "tcpvad/tensor_io.hpp"

namespace tcpvad {

/// Per-frame grid of c-bit prototype codes, T x rows x cols.
struct BinaryMapSequence {
    int frames = 0;
    GridSpec grid;
    int bits = 0;
    std::vector<std::uint32_t> codes;

    std::uint32_t at(int t, int row, int col) const { return codes[index(t, row, col)]; }
    std::uint32_t& at(int t, int row, int col) { return codes[index(t, row, col)]; }

    std::uint32_t code_count() const noexcept { return 1u << bits; }

    /// Throws CodeOutOfRange if any code is >= 2^bits.
    void validate() const;

    /// u8 payload when bits <= 8, otherwise f32 (exact below 2^24).
    io::Tensor to_tensor() const;
    static BinaryMapSequence from_tensor(const io::Tensor& tensor, int bits, int frame_height, int frame_width);

private:
    std::size_t index(int t, int row, int col) const noexcept {
        return (static_cast<std::size_t>(t) * grid.rows + row) * grid.cols + col;
    }
};

}  // namespace tcpvad
