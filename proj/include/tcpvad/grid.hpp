#pragma once

namespace tcpvad {

/// Half-open pixel rectangle [row0, row1) x [col0, col1).
struct CellRect {
    int row0 = 0;
    int row1 = 0;
    int col0 = 0;
    int col1 = 0;

    int area() const noexcept { return (row1 - row0) * (col1 - col0); }
};

/// Partition of an H x W frame into rows x cols cells. Every cell spans
/// floor(H/rows) x floor(W/cols) pixels, except that the last row and the
/// last column absorb the remainder.
struct GridSpec {
    int rows = 5;
    int cols = 8;
    int height = 0;
    int width = 0;

    int cells() const noexcept { return rows * cols; }

    /// Throws Errc::GridTooFine when the grid cannot be laid over the frame.
    void validate() const;

    CellRect cell(int row, int col) const noexcept;

    /// Index of the cell row/column containing pixel row y / column x.
    int row_of(int y) const noexcept;
    int col_of(int x) const noexcept;

    bool operator==(const GridSpec&) const = default;
};

}  // namespace tcpvad
