#pragma once

#include "kgpath/mining.hpp"
#include "kgpath/scoring.hpp"

#include <set>
#include <vector>

namespace kgpath {

// Paths compare on (mid, rel1, rel2); both sides are expected in the same
// orientation.
bool same_path(const Path& a, const Path& b);

// 1 iff p1 appears within the top n entries.
int hits_at_n(const RankedPathList& ranked, const Path& p1, std::size_t n);

// AP@n = sum of precision@i over relevant hits in the top n, divided by
// min(|relevant|, n).
double average_precision_at_n(const RankedPathList& ranked, const std::vector<Path>& relevant,
                              std::size_t n);

// Fractional (average) ranks for ties, ascending.
std::vector<double> fractional_ranks(const std::vector<double>& values);

// Pearson correlation of the fractional rank vectors. Throws on constant
// input (undefined correlation).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

} // namespace kgpath
