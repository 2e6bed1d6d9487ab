// Independent reference implementations used only by tests. These stay
// deliberately separate from the library code paths they check: scalar
// loops, no Eigen, and where possible a different algorithmic route.
#pragma once

#include "prawn/media_hash.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Average hash by per-pixel scatter: each pixel distributes its area across
// the 8x8 cells it overlaps (the library gathers per cell instead). Uses the
// same integer-scaled luma and sum comparison as the library, so both routes
// are exact and comparable bit for bit; only the traversal differs.
inline std::uint64_t average_hash(const prawn::media::FrameImage& frame) {
    const int w = frame.width, h = frame.height;
    double cell_sum[8][8] = {};
    for (int py = 0; py < h; ++py) {
        for (int px = 0; px < w; ++px) {
            double value;
            if (frame.channel_mode == prawn::media::ChannelMode::Gray) {
                value = 1000.0 * frame.pixels[static_cast<std::size_t>(py) * w + px];
            } else {
                const std::size_t base = (static_cast<std::size_t>(py) * w + px) * 3;
                value = 299.0 * frame.pixels[base] + 587.0 * frame.pixels[base + 1] +
                        114.0 * frame.pixels[base + 2];
            }
            // pixel spans [px, px+1) x [py, py+1) in image units; cell c spans
            // [c*w/8, (c+1)*w/8) horizontally.
            for (int cy = 0; cy < 8; ++cy) {
                const double cy_lo = cy * h / 8.0, cy_hi = (cy + 1) * h / 8.0;
                const double oy = std::min<double>(py + 1, cy_hi) - std::max<double>(py, cy_lo);
                if (oy <= 0.0) continue;
                for (int cx = 0; cx < 8; ++cx) {
                    const double cx_lo = cx * w / 8.0, cx_hi = (cx + 1) * w / 8.0;
                    const double ox =
                        std::min<double>(px + 1, cx_hi) - std::max<double>(px, cx_lo);
                    if (ox <= 0.0) continue;
                    cell_sum[cy][cx] += oy * ox * value;
                }
            }
        }
    }
    double total = 0.0;
    for (int cy = 0; cy < 8; ++cy)
        for (int cx = 0; cx < 8; ++cx) total += cell_sum[cy][cx];
    std::uint64_t bits = 0;
    for (int i = 0; i < 64; ++i)
        if (64.0 * cell_sum[i / 8][i % 8] > total) bits |= 1ULL << (63 - i);
    return bits;
}

// Full sort over (score desc, id asc); no partial selection.
inline std::vector<std::string> topk_full_sort(const std::vector<std::string>& ids,
                                               const std::vector<double>& scores,
                                               std::size_t k) {
    std::vector<std::size_t> order(ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return ids[a] < ids[b];
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k && i < order.size(); ++i) out.push_back(ids[order[i]]);
    return out;
}

// Krippendorff alpha by literal pair counting over the pooled ratings:
// observed disagreement from within-unit pairs, expected disagreement from
// all cross-value pairs without replacement.
inline double alpha_pair_counting(const std::vector<std::pair<int, int>>& units) {
    std::vector<int> pooled;
    double observed_sum = 0.0; // sum over units of within-unit disagreement
    for (const auto& [a, b] : units) {
        pooled.push_back(a);
        pooled.push_back(b);
        // each unit has m = 2 ratings; its contribution is
        // sum_{g != h} delta / (m - 1)
        observed_sum += (a != b ? 2.0 : 0.0) / 1.0;
    }
    const double n = static_cast<double>(pooled.size());
    const double observed = observed_sum / n;
    double disagreeing_pairs = 0.0;
    for (std::size_t g = 0; g < pooled.size(); ++g)
        for (std::size_t h = 0; h < pooled.size(); ++h)
            if (g != h && pooled[g] != pooled[h]) disagreeing_pairs += 1.0;
    const double expected = disagreeing_pairs / (n * (n - 1.0));
    return 1.0 - observed / expected;
}

// Max achievable DCG over every permutation of the pool (factorial cost;
// keep the pool small).
inline double max_dcg_brute_force(std::vector<int> pool) {
    std::sort(pool.begin(), pool.end());
    double best = -1.0;
    do {
        double dcg = 0.0;
        for (std::size_t i = 0; i < pool.size(); ++i)
            dcg += pool[i] / std::log2(static_cast<double>(i) + 2.0);
        best = std::max(best, dcg);
    } while (std::next_permutation(pool.begin(), pool.end()));
    return best;
}

// Central finite differences of a scalar function of one coordinate that the
// caller perturbs via the setter.
inline double central_difference(const std::function<double()>& value,
                                 const std::function<void(double)>& shift, double eps) {
    shift(eps);
    const double plus = value();
    shift(-2.0 * eps);
    const double minus = value();
    shift(eps); // restore
    return (plus - minus) / (2.0 * eps);
}

inline double relative_error(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-6});
    return std::abs(a - b) / scale;
}

// Straight-line least squares by the scalar normal equations.
inline std::pair<double, double> least_squares_line(const std::vector<double>& x,
                                                    const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    return {slope, intercept};
}

} // namespace oracle
