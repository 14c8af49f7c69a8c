#include "tcpvad/grid.hpp"

#include <algorithm>
#include <string>

#include "tcpvad/error.hpp"

namespace tcpvad {

void GridSpec::validate() const {
    if (rows < 1 || cols < 1 || height < 1 || width < 1) {
        throw Error(Errc::InvalidArgument, "grid and frame dimensions must be positive");
    }
    if (rows > height || cols > width) {
        throw Error(Errc::GridTooFine, "grid " + std::to_string(rows) + "x" + std::to_string(cols) +
                                           " exceeds frame " + std::to_string(height) + "x" +
                                           std::to_string(width));
    }
}

CellRect GridSpec::cell(int row, int col) const noexcept {
    const int ch = height / rows;
    const int cw = width / cols;
    CellRect r;
    r.row0 = row * ch;
    r.row1 = (row == rows - 1) ? height : r.row0 + ch;
    r.col0 = col * cw;
    r.col1 = (col == cols - 1) ? width : r.col0 + cw;
    return r;
}

int GridSpec::row_of(int y) const noexcept { return std::min(y / (height / rows), rows - 1); }

int GridSpec::col_of(int x) const noexcept { return std::min(x / (width / cols), cols - 1); }

}  // namespace tcpvad
