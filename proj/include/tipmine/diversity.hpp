#pragma once

// Score fusion, quality-diversity kernel assembly, and fast greedy MAP
// selection with incremental Cholesky-style updates.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "tipmine/error.hpp"

namespace tipmine {

struct FuseConfig {
    double alpha = 0.8;
    bool minmax_content = true;  // per-song min-max of the content score
    double floor = 1e-9;         // lifts zero scores so the kernel stays valid
};

// Content scores are min-max normalized to [0,1] across the candidate set
// (all 1.0 when the range is degenerate), then Score = norm + alpha * style.
inline std::map<std::string, double> fuse(
    const std::map<std::string, double>& content,
    const std::map<std::string, double>& style, const FuseConfig& cfg = {}) {
    if (content.empty()) throw DataError("no candidates to fuse");
    double lo = content.begin()->second, hi = lo;
    for (const auto& [id, v] : content) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi - lo;
    std::map<std::string, double> fused;
    for (const auto& [id, a] : content) {
        auto it = style.find(id);
        if (it == style.end())
            throw DataError("candidate missing a style score: " + id);
        double norm = a;
        if (cfg.minmax_content) norm = range > 0.0 ? (a - lo) / range : 1.0;
        fused[id] = std::max(norm + cfg.alpha * it->second, cfg.floor);
    }
    return fused;
}

struct DppKernel {
    std::vector<std::string> ids;  // candidate order fixes all indexing
    std::vector<double> L;         // row-major n x n
    std::vector<double> quality;   // fused Score per candidate, used for padding
    double ridge = 1e-8;

    std::size_t size() const { return ids.size(); }
    double at(std::size_t i, std::size_t j) const { return L[i * ids.size() + j]; }
};

// L_ij = Score_i * <f_i, f_j> * Score_j with ridge * I added. PSD by
// construction up to rounding.
inline DppKernel build_kernel(const std::vector<std::string>& ids,
                              const std::map<std::string, double>& scores,
                              const std::vector<std::vector<double>>& features,
                              double ridge = 1e-8) {
    if (ids.empty()) throw DataError("no candidates for the kernel");
    if (features.size() != ids.size())
        throw UsageError("feature count does not match candidate count");
    const std::size_t dim = features[0].size();
    for (const auto& f : features)
        if (f.size() != dim)
            throw UsageError("feature vectors have mismatched dimensions");

    DppKernel k;
    k.ids = ids;
    k.ridge = ridge;
    k.quality.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = scores.find(id);
        if (it == scores.end())
            throw DataError("candidate missing a fused score: " + id);
        k.quality.push_back(it->second);
    }

    const std::size_t n = ids.size();
    k.L.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t d = 0; d < dim; ++d)
                dot += features[i][d] * features[j][d];
            double v = k.quality[i] * dot * k.quality[j];
            if (i == j) v += ridge;
            k.L[i * n + j] = v;
            k.L[j * n + i] = v;
        }
    }
    return k;
}

struct TipSelection {
    std::vector<std::size_t> order;  // selected candidate indices, in pick order
    std::vector<double> gains;       // log-det increments for the greedy prefix
    std::size_t greedy_count = 0;    // picks before padding started
    int k = 0;
};

// Greedy log-det maximization. Each candidate carries a residual vector c_i
// and squared marginal d2_i = L_ii - |c_i|^2; the pick is the largest d2
// (ties to the lowest index) and its gain is log d2. When the best d2 falls
// to the stop threshold the remainder is padded by descending quality, and
// padded picks record no gain.
inline TipSelection greedy_map(const DppKernel& kernel, int k,
                               double stop_threshold = 1e-12) {
    if (k < 1) throw UsageError("selection size must be at least 1");
    const std::size_t n = kernel.size();
    if (n == 0) throw DataError("empty kernel");

    TipSelection sel;
    sel.k = k;
    const std::size_t want = std::min<std::size_t>(k, n);

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = kernel.at(i, i);
    std::vector<std::vector<double>> c(n);
    std::vector<char> picked(n, 0);

    while (sel.order.size() < want) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i)
            if (!picked[i] && (best == n || d2[i] > d2[best])) best = i;
        if (best == n || d2[best] <= stop_threshold) break;

        const std::size_t j = best;
        picked[j] = 1;
        sel.order.push_back(j);
        sel.gains.push_back(std::log(d2[j]));
        const double dj = std::sqrt(d2[j]);

        for (std::size_t i = 0; i < n; ++i) {
            if (picked[i]) continue;
            double dot = 0.0;
            for (std::size_t s = 0; s < c[j].size(); ++s) dot += c[j][s] * c[i][s];
            const double e = (kernel.at(j, i) - dot) / dj;
            c[i].push_back(e);
            d2[i] -= e * e;
        }
        c[j].clear();
    }
    sel.greedy_count = sel.order.size();

    if (sel.order.size() < want) {
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < n; ++i)
            if (!picked[i]) rest.push_back(i);
        std::stable_sort(rest.begin(), rest.end(),
                         [&](std::size_t a, std::size_t b) {
                             if (kernel.quality[a] != kernel.quality[b])
                                 return kernel.quality[a] > kernel.quality[b];
                             return a < b;
                         });
        for (std::size_t i : rest) {
            if (sel.order.size() >= want) break;
            sel.order.push_back(i);
        }
    }
    return sel;
}

// Log determinant of the principal submatrix via dense Cholesky; independent
// of the incremental selection path.
inline double logdet_oracle(const DppKernel& kernel,
                            const std::vector<std::size_t>& subset) {
    const std::size_t m = subset.size();
    for (std::size_t i : subset)
        if (i >= kernel.size()) throw UsageError("subset index out of range");
    if (m == 0) return 0.0;

    std::vector<double> a(m * m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t cidx = 0; cidx < m; ++cidx)
            a[r * m + cidx] = kernel.at(subset[r], subset[cidx]);

    double logdet = 0.0;
    for (std::size_t jcol = 0; jcol < m; ++jcol) {
        double diag = a[jcol * m + jcol];
        for (std::size_t s = 0; s < jcol; ++s)
            diag -= a[jcol * m + s] * a[jcol * m + s];
        if (diag <= 0.0)
            throw NumericError("submatrix is not positive definite");
        const double root = std::sqrt(diag);
        a[jcol * m + jcol] = root;
        logdet += 2.0 * std::log(root);
        for (std::size_t r = jcol + 1; r < m; ++r) {
            double v = a[r * m + jcol];
            for (std::size_t s = 0; s < jcol; ++s)
                v -= a[r * m + s] * a[jcol * m + s];
            a[r * m + jcol] = v / root;
        }
    }
    return logdet;
}

}  // namespace tipmine
