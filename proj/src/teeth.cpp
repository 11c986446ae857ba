#include "toothsparse/teeth.hpp"

#include <ostream>
#include <stdexcept>
#include <string>

namespace toothsparse {

namespace {

constexpr std::array<int, 14> kUpperByColumn = {17, 16, 15, 14, 13, 12, 11,
                                                21, 22, 23, 24, 25, 26, 27};
constexpr std::array<int, 14> kLowerByColumn = {47, 46, 45, 44, 43, 42, 41,
                                                31, 32, 33, 34, 35, 36, 37};

bool valid_fdi(int fdi) {
  const int quadrant = fdi / 10;
  const int position = fdi % 10;
  return quadrant >= 1 && quadrant <= 4 && position >= 1 && position <= 7;
}

}  // namespace

ToothLabel::ToothLabel(int fdi) : fdi_(fdi) {
  if (!valid_fdi(fdi)) {
    throw std::invalid_argument("ToothLabel: invalid FDI code " + std::to_string(fdi) +
                                " (valid: 11..17, 21..27, 31..37, 41..47)");
  }
}

std::ostream& operator<<(std::ostream& os, ToothLabel label) {
  return os << label.fdi();
}

const std::array<ToothLabel, 28>& all_labels() {
  static const std::array<ToothLabel, 28> labels = [] {
    std::array<int, 28> codes{};
    std::size_t i = 0;
    for (int quadrant = 1; quadrant <= 4; ++quadrant) {
      for (int position = 1; position <= 7; ++position) {
        codes[i++] = quadrant * 10 + position;
      }
    }
    return std::array<ToothLabel, 28>{
        ToothLabel(codes[0]),  ToothLabel(codes[1]),  ToothLabel(codes[2]),
        ToothLabel(codes[3]),  ToothLabel(codes[4]),  ToothLabel(codes[5]),
        ToothLabel(codes[6]),  ToothLabel(codes[7]),  ToothLabel(codes[8]),
        ToothLabel(codes[9]),  ToothLabel(codes[10]), ToothLabel(codes[11]),
        ToothLabel(codes[12]), ToothLabel(codes[13]), ToothLabel(codes[14]),
        ToothLabel(codes[15]), ToothLabel(codes[16]), ToothLabel(codes[17]),
        ToothLabel(codes[18]), ToothLabel(codes[19]), ToothLabel(codes[20]),
        ToothLabel(codes[21]), ToothLabel(codes[22]), ToothLabel(codes[23]),
        ToothLabel(codes[24]), ToothLabel(codes[25]), ToothLabel(codes[26]),
        ToothLabel(codes[27])};
  }();
  return labels;
}

TeethMatrixPos label_to_pos(ToothLabel label) {
  const auto& row = (label.quadrant() <= 2) ? kUpperByColumn : kLowerByColumn;
  for (int c = 0; c < 14; ++c) {
    if (row[static_cast<std::size_t>(c)] == label.fdi()) {
      return TeethMatrixPos{label.quadrant() <= 2 ? ToothRow::upper : ToothRow::lower,
                            c + 1};
    }
  }
  throw std::logic_error("label_to_pos: unreachable");
}

ToothLabel pos_to_label(TeethMatrixPos pos) {
  if (pos.column < 1 || pos.column > 14) {
    throw std::invalid_argument("pos_to_label: column " + std::to_string(pos.column) +
                                " outside 1..14");
  }
  const auto& row = (pos.row == ToothRow::upper) ? kUpperByColumn : kLowerByColumn;
  return ToothLabel(row[static_cast<std::size_t>(pos.column - 1)]);
}

}  // namespace toothsparse
