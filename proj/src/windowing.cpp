#include "fluorsim/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fluorsim {

namespace {

void check_args(std::size_t n, std::size_t min_distance) {
    if (min_distance < 2)
        throw std::invalid_argument("window length must be at least 2");
    if (min_distance > n / 2)
        throw std::invalid_argument("window length must not exceed half the signal");
}

}  // namespace

std::vector<std::size_t> find_peaks(const std::vector<double>& values,
                                    std::size_t min_distance) {
    const std::size_t n = values.size();
    check_args(n, min_distance);

    // Candidates: rise into index k, plateau allowed, strict fall after it.
    std::vector<std::size_t> cand;  // 0-based
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (!(values[k] > values[k - 1])) continue;
        std::size_t m = k;
        while (m + 1 < n && values[m + 1] == values[k]) ++m;
        if (m + 1 < n && values[m + 1] < values[k]) cand.push_back(k);
    }

    std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
        return values[a] > values[b];
    });

    std::vector<std::size_t> accepted;
    for (std::size_t k : cand) {
        bool ok = true;
        for (std::size_t a : accepted) {
            const std::size_t d = a > k ? a - k : k - a;
            if (d <= min_distance) {
                ok = false;
                break;
            }
        }
        if (ok) accepted.push_back(k);
    }

    std::sort(accepted.begin(), accepted.end());
    for (std::size_t& k : accepted) ++k;  // report 1-based
    return accepted;
}

std::vector<std::size_t> find_peaks(const Spectrum& s, std::size_t min_distance) {
    return find_peaks(s.values, min_distance);
}

WindowPlan build_plan(const std::vector<double>& values, std::size_t window_len,
                      double alpha) {
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("alpha must be in [0, 1]");
    WindowPlan plan;
    plan.window_len = window_len;
    plan.total_len = values.size();
    plan.designed = values.size() / window_len;
    plan.alpha = alpha;
    plan.peaks = find_peaks(values, window_len);

    for (std::size_t k : plan.peaks) {
        const std::size_t seg = (k - 1) / window_len + 1;
        if (plan.indicator.empty() || plan.indicator.back() != seg)
            plan.indicator.push_back(seg);
    }

    auto marked = [&](std::size_t seg) {
        return seg >= 1 &&
               std::binary_search(plan.indicator.begin(), plan.indicator.end(), seg);
    };

    plan.cases.assign(plan.designed + 1, 5);
    for (std::size_t i = 1; i <= plan.designed; ++i) {
        const bool here = marked(i);
        const bool left = marked(i - 1);
        const bool right = marked(i + 1);
        int t = 5;
        if (here)
            t = 1;
        else if (left && right)
            t = 2;
        else if (left)
            t = 3;
        else if (right)
            t = 4;
        plan.cases[i - 1] = t;
    }
    return plan;
}

WindowPlan build_plan(const Spectrum& s, std::size_t window_len, double alpha) {
    return build_plan(s.values, window_len, alpha);
}

std::vector<double> window_vector(int window_case, std::size_t window_len, double alpha) {
    if (window_case < 1 || window_case > 5)
        throw std::invalid_argument("window case must be in 1..5");
    if (window_len < 2)
        throw std::invalid_argument("window length must be at least 2");
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("alpha must be in [0, 1]");

    const auto lw = static_cast<double>(window_len);
    std::vector<double> w(window_len, 1.0);

    if (window_case == 1) {
        for (std::size_t idx = 0; idx < window_len; ++idx) {
            const double j = static_cast<double>(idx + 1);
            w[idx] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * j / lw));
        }
    } else if (window_case != 5 && alpha > 0.0) {
        const double gamma = lw - 1.0;
        const double beta = 1.0 - alpha / 2.0;
        const double rise_end = alpha * gamma / 2.0;
        const double fall_start = gamma * beta;
        const bool has_rise = window_case == 2 || window_case == 3;
        const bool has_fall = window_case == 2 || window_case == 4;
        for (std::size_t idx = 0; idx < window_len; ++idx) {
            const double j = static_cast<double>(idx + 1);
            const double u = 2.0 * (j - 1.0) / (alpha * gamma);
            // Branches in printed order; an earlier branch wins where the
            // inclusive bounds overlap, so the flat branch shadows the
            // falling one at j == gamma*beta.
            if (has_rise && j <= rise_end)
                w[idx] = 0.5 * (1.0 + std::cos(std::numbers::pi * (u - 1.0)));
            else if (has_fall && j > fall_start)
                w[idx] = 0.5 * (1.0 + std::cos(std::numbers::pi * (u - 2.0 / alpha + 1.0)));
            // otherwise flat: 1
        }
    }

    for (double& v : w) v = std::clamp(v, 0.0, 1.0);
    return w;
}

std::vector<double> foundation(const WindowPlan& plan) {
    std::vector<double> jf(plan.total_len, 1.0);
    for (std::size_t i = 0; i < plan.designed; ++i) {
        const auto w = window_vector(plan.cases[i], plan.window_len, plan.alpha);
        std::copy(w.begin(), w.end(), jf.begin() + static_cast<std::ptrdiff_t>(i * plan.window_len));
    }
    return jf;
}

}  // namespace fluorsim
