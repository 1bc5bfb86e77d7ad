#include "kgpath/metrics.hpp"
#include "kgpath/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kgpath {

bool same_path(const Path& a, const Path& b) {
    return a.mid == b.mid && a.rel1 == b.rel1 && a.rel2 == b.rel2;
}

int hits_at_n(const RankedPathList& ranked, const Path& p1, std::size_t n) {
    if (n < 1) throw ValidationError("hits cutoff must be >= 1");
    std::size_t limit = std::min(n, ranked.entries.size());
    for (std::size_t i = 0; i < limit; ++i)
        if (same_path(ranked.entries[i].path, p1)) return 1;
    return 0;
}

double average_precision_at_n(const RankedPathList& ranked, const std::vector<Path>& relevant,
                              std::size_t n) {
    if (relevant.empty()) throw ValidationError("relevant path set must be non-empty");
    std::size_t limit = std::min(n, ranked.entries.size());
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < limit; ++i) {
        bool rel = std::any_of(relevant.begin(), relevant.end(), [&](const Path& p) {
            return same_path(ranked.entries[i].path, p);
        });
        if (rel) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(std::min(relevant.size(), n));
}

std::vector<double> fractional_ranks(const std::vector<double>& values) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && values[idx[j + 1]] == values[idx[i]]) ++j;
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("spearman: length mismatch");
    if (a.size() < 2) throw ValidationError("spearman: need at least 2 observations");
    for (double v : a)
        if (!std::isfinite(v)) throw ValidationError("spearman: non-finite input");
    for (double v : b)
        if (!std::isfinite(v)) throw ValidationError("spearman: non-finite input");

    std::vector<double> ra = fractional_ranks(a);
    std::vector<double> rb = fractional_ranks(b);

    const double n = static_cast<double>(ra.size());
    double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        double da = ra[i] - ma, db = rb[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0)
        throw ValidationError("spearman: undefined correlation (constant input)");
    return cov / std::sqrt(va * vb);
}

} // namespace kgpath
