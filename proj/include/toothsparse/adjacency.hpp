#ifndef TOOTHSPARSE_ADJACENCY_HPP
#define TOOTHSPARSE_ADJACENCY_HPP

#include <set>
#include <vector>

#include "toothsparse/teeth.hpp"

namespace toothsparse {

/// Selects the existing teeth adjacent to a set of missing teeth.
///
/// Let CRmin/CRmax be the smallest/largest teeth-matrix column occupied by a
/// missing tooth. Candidate columns are [CRmin - t, CRmax + t]; a range end
/// that runs past a border of the 2x14 matrix wraps to the opposite end
/// (left overflow adds columns [CRmin - t + 14, 14], right overflow adds
/// [1, CRmax + t - 14]). The result is every present tooth in a candidate
/// column, both rows, excluding the missing teeth.
///
/// Ordering: candidate columns ascending, upper row before lower within a
/// column, wrapped columns appended after the non-wrapped ones.
///
/// Throws std::invalid_argument when missing is empty, overlaps present, or
/// t < 1; NoSupportError when no present tooth falls in a candidate column.
std::vector<ToothLabel> resolve_adjacent(const std::set<ToothLabel>& missing,
                                         const std::set<ToothLabel>& present,
                                         int adjacency_radius);

}  // namespace toothsparse

#endif  // TOOTHSPARSE_ADJACENCY_HPP
