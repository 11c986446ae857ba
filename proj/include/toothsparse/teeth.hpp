#ifndef TOOTHSPARSE_TEETH_HPP
#define TOOTHSPARSE_TEETH_HPP

#include <array>
#include <compare>
#include <iosfwd>

namespace toothsparse {

/// FDI two-digit tooth code. Valid codes are the 28 adult teeth excluding
/// third molars: {11..17, 21..27, 31..37, 41..47}.
class ToothLabel {
 public:
  /// Throws std::invalid_argument for codes outside the 28-tooth set
  /// (third molars 18/28/38/48 included).
  explicit ToothLabel(int fdi);

  int fdi() const { return fdi_; }
  int quadrant() const { return fdi_ / 10; }  // 1 upper-right .. 4 lower-right
  int position() const { return fdi_ % 10; }  // 1 central incisor .. 7 second molar

  auto operator<=>(const ToothLabel&) const = default;

 private:
  int fdi_;
};

std::ostream& operator<<(std::ostream& os, ToothLabel label);

/// The 28 valid labels in ascending FDI order.
const std::array<ToothLabel, 28>& all_labels();

enum class ToothRow { upper, lower };

/// Slot in the 2x14 teeth matrix. Columns run 1..14 along each row:
/// upper = 17 16 15 14 13 12 11 21 22 23 24 25 26 27,
/// lower = 47 46 45 44 43 42 41 31 32 33 34 35 36 37.
struct TeethMatrixPos {
  ToothRow row = ToothRow::upper;
  int column = 1;  // 1..14

  auto operator<=>(const TeethMatrixPos&) const = default;
};

TeethMatrixPos label_to_pos(ToothLabel label);

/// Inverse of label_to_pos. Throws std::invalid_argument for columns
/// outside 1..14.
ToothLabel pos_to_label(TeethMatrixPos pos);

}  // namespace toothsparse

#endif  // TOOTHSPARSE_TEETH_HPP
