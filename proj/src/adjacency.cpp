#include "toothsparse/adjacency.hpp"

#include <algorithm>
#include <stdexcept>

#include "toothsparse/errors.hpp"

namespace toothsparse {

std::vector<ToothLabel> resolve_adjacent(const std::set<ToothLabel>& missing,
                                         const std::set<ToothLabel>& present,
                                         int adjacency_radius) {
  if (missing.empty()) {
    throw std::invalid_argument("resolve_adjacent: missing set is empty");
  }
  if (adjacency_radius < 1) {
    throw std::invalid_argument("resolve_adjacent: adjacency radius must be >= 1");
  }
  for (const ToothLabel& m : missing) {
    if (present.count(m) != 0) {
      throw std::invalid_argument("resolve_adjacent: tooth " + std::to_string(m.fdi()) +
                                  " is both missing and present");
    }
  }

  int cr_min = 15;
  int cr_max = 0;
  for (const ToothLabel& m : missing) {
    const int c = label_to_pos(m).column;
    cr_min = std::min(cr_min, c);
    cr_max = std::max(cr_max, c);
  }

  const int lo = cr_min - adjacency_radius;
  const int hi = cr_max + adjacency_radius;

  // Non-wrapped columns first, then wrapped ones in the same order the
  // border rules introduce them.
  std::vector<int> columns;
  for (int c = std::max(lo, 1); c <= std::min(hi, 14); ++c) columns.push_back(c);
  if (lo <= 0) {
    for (int c = std::max(lo + 14, 1); c <= 14; ++c) columns.push_back(c);
  }
  if (hi > 14) {
    for (int c = 1; c <= std::min(hi - 14, 14); ++c) columns.push_back(c);
  }

  std::vector<ToothLabel> out;
  std::set<int> seen_columns;
  for (int c : columns) {
    if (!seen_columns.insert(c).second) continue;
    for (ToothRow row : {ToothRow::upper, ToothRow::lower}) {
      const ToothLabel label = pos_to_label(TeethMatrixPos{row, c});
      if (missing.count(label) != 0) continue;
      if (present.count(label) == 0) continue;  // absent but not predicted: skip
      out.push_back(label);
    }
  }

  if (out.empty()) {
    throw NoSupportError("resolve_adjacent: no existing teeth adjacent to the missing set");
  }
  return out;
}

}  // namespace toothsparse
