#pragma once

#include <cstddef>
#include <vector>

#include "fluorsim/spectrum.hpp"

namespace fluorsim {

// Designed segment i (1-based, i <= designed) covers 1-based sample indices
// [(i-1)*window_len + 1, i*window_len]; segment designed+1 holds the residual
// (possibly empty) and is always case 5.
struct WindowPlan {
    std::size_t window_len = 0;  // L_w
    std::size_t designed = 0;    // floor(N / L_w)
    std::size_t total_len = 0;   // N
    double alpha = 1.0;
    std::vector<std::size_t> peaks;      // 1-based sample indices, ascending
    std::vector<std::size_t> indicator;  // segments containing peaks, ascending
    std::vector<int> cases;              // size designed+1; cases[i] = segment i+1
};

// Strict interior local maxima (plateaus report their first index), kept
// greedily tallest-first with any candidate within min_distance of an
// accepted peak discarded. Returned ascending, 1-based.
std::vector<std::size_t> find_peaks(const std::vector<double>& values,
                                    std::size_t min_distance);
std::vector<std::size_t> find_peaks(const Spectrum& s, std::size_t min_distance);

// Case per designed segment, first match wins:
//   1: segment holds a peak             -> Hanning
//   2: both neighbors hold peaks        -> Tukey
//   3: only the left neighbor does      -> rising taper, then flat
//   4: only the right neighbor does     -> flat, then falling taper
//   5: otherwise                        -> ones
// Out-of-range neighbors count as peak-free. A peak in the residual segment
// makes it a valid neighbor for rule purposes even though the residual itself
// stays case 5.
WindowPlan build_plan(const std::vector<double>& values, std::size_t window_len,
                      double alpha);
WindowPlan build_plan(const Spectrum& s, std::size_t window_len, double alpha);

// Window evaluated at j = 1..window_len as printed (Hanning hits 0 only at
// j = L_w; the slight asymmetry is the model's). Tukey pieces use
// gamma = L_w - 1, beta = 1 - alpha/2, inclusive bounds, first branch wins at
// overlaps; the falling piece extends through j = L_w, which the printed
// bounds leave uncovered. alpha = 0 degenerates to all ones.
std::vector<double> window_vector(int window_case, std::size_t window_len, double alpha);

// Per-segment windows cascaded in order; residual filled with ones.
std::vector<double> foundation(const WindowPlan& plan);

}  // namespace fluorsim
