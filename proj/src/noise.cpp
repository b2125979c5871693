#include "fluorsim/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fluorsim {

namespace {

// Stream label separating E_win estimation draws from anything else derived
// from the same user seed.
constexpr std::uint64_t kEwinStream = 0x4557494E;

void check_eta(double eta) {
    if (!(eta >= 0.0) || eta > 1.0)
        throw std::invalid_argument("eta must be in [0, 1]");
}

void check_plan(const WindowPlan& plan) {
    if (plan.window_len < 2 || plan.total_len < plan.window_len ||
        plan.cases.size() != plan.designed + 1)
        throw std::invalid_argument("window plan is malformed");
}

std::size_t seg_begin(const WindowPlan& plan, std::size_t i) {  // 1-based segment
    return (i - 1) * plan.window_len;                           // 0-based sample
}

// Blend regions for the boundary adjustment of cases 2-4 mirror the window
// branch predicates exactly (first match wins).
struct TaperRegions {
    double rise_end;
    double fall_start;
};

TaperRegions regions(std::size_t window_len, double alpha) {
    const double gamma = static_cast<double>(window_len) - 1.0;
    return {alpha * gamma / 2.0, gamma * (1.0 - alpha / 2.0)};
}

}  // namespace

NoiseModel parse_noise_model(const std::string& name) {
    if (name == "dilate") return NoiseModel::Dilate;
    if (name == "compress") return NoiseModel::Compress;
    if (name == "failure") return NoiseModel::Failure;
    if (name == "optimized") return NoiseModel::Optimized;
    throw std::invalid_argument("unknown noise model '" + name + "'");
}

std::string noise_model_name(NoiseModel m) {
    switch (m) {
        case NoiseModel::Dilate: return "dilate";
        case NoiseModel::Compress: return "compress";
        case NoiseModel::Failure: return "failure";
        case NoiseModel::Optimized: return "optimized";
    }
    return "unknown";
}

void validate_params(const NoiseParams& params) {
    check_eta(params.eta);
    if (params.alpha < 0.0 || params.alpha > 1.0)
        throw std::invalid_argument("alpha must be in [0, 1]");
    if (params.window_len < 2)
        throw std::invalid_argument("window length must be at least 2");
    if (!(params.p >= 0.0) || params.p > 1.0)
        throw std::invalid_argument("p outside [0, 1]");
    if (params.a_c1 < 0.0 || params.a_c2 < 0.0 || params.a_c3 < 0.0 || params.a_d1 < 0.0)
        throw std::invalid_argument("control coefficients must be nonnegative");
}

std::vector<double> dilation_multiplier(const WindowPlan& plan, double eta) {
    check_eta(eta);
    check_plan(plan);
    std::vector<double> m(plan.total_len, 1.0);
    const auto w = window_vector(1, plan.window_len, plan.alpha);
    for (std::size_t i = 1; i <= plan.designed; ++i) {
        if (plan.cases[i - 1] != 1) continue;
        const std::size_t b = seg_begin(plan, i);
        for (std::size_t j = 0; j < plan.window_len; ++j) m[b + j] = eta * w[j] + 1.0;
    }
    return m;
}

std::vector<double> compression_multiplier(const WindowPlan& plan, double eta) {
    check_eta(eta);
    check_plan(plan);
    std::vector<double> m(plan.total_len, 1.0);
    for (std::size_t i = 1; i <= plan.designed; ++i) {
        if (plan.cases[i - 1] == 5) continue;  // eta*1 + (1-eta) == 1, keep it exact
        const auto w = window_vector(plan.cases[i - 1], plan.window_len, plan.alpha);
        const std::size_t b = seg_begin(plan, i);
        for (std::size_t j = 0; j < plan.window_len; ++j)
            m[b + j] = eta * w[j] + (1.0 - eta);
    }
    return m;
}

std::vector<double> failure_multiplier(const WindowPlan& plan, double eta, const Rng& rng) {
    check_eta(eta);
    check_plan(plan);
    std::vector<double> m(plan.total_len, 1.0);
    const double base = 1.0 - eta / 2.0;
    for (std::size_t i = 1; i <= plan.designed; ++i) {
        const int t = plan.cases[i - 1];
        if (t == 5) continue;  // stays the ones window
        const auto w = window_vector(t, plan.window_len, plan.alpha);
        const std::size_t b = seg_begin(plan, i);
        const double gain = t == 1 ? eta * rng.uniform_at(i - 1) : eta;
        for (std::size_t j = 0; j < plan.window_len; ++j) m[b + j] = gain * w[j] + base;
    }
    return m;
}

std::vector<double> optimized_multiplier(const WindowPlan& plan, const NoiseParams& params,
                                         const Rng& rng) {
    validate_params(params);
    check_plan(plan);
    if (plan.window_len != params.window_len ||
        std::abs(plan.alpha - params.alpha) > 1e-12)
        throw std::invalid_argument("plan and params disagree on window length or alpha");
    const double eta = params.eta;
    const auto lw = plan.window_len;
    const auto w1 = window_vector(1, lw, plan.alpha);

    std::vector<double> m(plan.total_len, 1.0);
    // Realized edge elements of each segment's multiplier; non-case-1
    // segments (including the residual) keep 1, which also covers the corner
    // where a taper's "peak neighbor" is a peak parked in the residual.
    std::vector<double> first_elem(plan.designed + 2, 1.0);
    std::vector<double> last_elem(plan.designed + 2, 1.0);

    for (std::size_t i = 1; i <= plan.designed; ++i) {
        if (plan.cases[i - 1] != 1) continue;
        const std::uint64_t draw = 4 * (i - 1);
        const bool compress = rng.bernoulli_at(draw + 0, params.p);
        double gain, base;
        if (compress) {
            const double x2 = rng.uniform_at(draw + 2);
            const double x3 = rng.uniform_at(draw + 3);
            gain = params.a_c1 * x2 * eta;
            base = 1.0 - params.a_c2 * eta + params.a_c3 * eta * x3;
        } else {
            const double x1 = rng.uniform_at(draw + 1);
            gain = params.a_d1 * x1 * eta;
            base = 1.0;
        }
        const std::size_t b = seg_begin(plan, i);
        for (std::size_t j = 0; j < lw; ++j) m[b + j] = gain * w1[j] + base;
        first_elem[i] = m[b];
        last_elem[i] = m[b + lw - 1];
    }

    const auto [rise_end, fall_start] = regions(lw, plan.alpha);
    for (std::size_t i = 1; i <= plan.designed; ++i) {
        const int t = plan.cases[i - 1];
        if (t == 1 || t == 5) continue;
        const auto w = window_vector(t, lw, plan.alpha);
        const std::size_t b = seg_begin(plan, i);
        // Taper sides face the peaks: the rising side touches the left
        // neighbor's last element, the falling side the right neighbor's
        // first. Blending v = w*(1-a) + a pins the boundary element to the
        // neighbor's realized edge (the taper is exactly 0 there).
        const double a_left = last_elem[i - 1];
        const double a_right = first_elem[i + 1];
        for (std::size_t j = 0; j < lw; ++j) {
            const double jj = static_cast<double>(j + 1);
            double a = 1.0;
            if (t == 3)
                a = a_left;
            else if (t == 4)
                a = a_right;
            else if (jj <= rise_end)
                a = a_left;
            else if (jj > fall_start)
                a = a_right;
            m[b + j] = w[j] * (1.0 - a) + a;
        }
    }
    return m;
}

Spectrum apply_multiplier(const Spectrum& s, const std::vector<double>& multiplier) {
    if (s.values.size() != multiplier.size())
        throw std::invalid_argument("multiplier length does not match spectrum");
    Spectrum out = s;
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] *= multiplier[k];
    return out;
}

Spectrum dilation_noise(const Spectrum& s, const WindowPlan& plan, double eta) {
    return apply_multiplier(s, dilation_multiplier(plan, eta));
}

Spectrum compression_noise(const Spectrum& s, const WindowPlan& plan, double eta) {
    return apply_multiplier(s, compression_multiplier(plan, eta));
}

Spectrum failure_noise(const Spectrum& s, const WindowPlan& plan, double eta, const Rng& rng) {
    return apply_multiplier(s, failure_multiplier(plan, eta, rng));
}

Spectrum optimized_noise(const Spectrum& s, const WindowPlan& plan,
                         const NoiseParams& params, const Rng& rng) {
    return apply_multiplier(s, optimized_multiplier(plan, params, rng));
}

ConstraintReport check_constraints(const NoiseParams& params) {
    ConstraintReport rep;
    rep.balance.residual = std::abs(2.0 * params.a_c2 - params.a_c3 - params.a_d1);
    rep.variance.residual = std::abs(params.a_c3 * params.a_c3 - params.a_d1 * params.a_d1);
    rep.dominance.residual =
        std::max(0.0, params.a_c1 - params.a_c2 + params.a_c3 - params.a_d1);
    rep.balance.pass = rep.balance.residual <= 1e-12;
    rep.variance.pass = rep.variance.residual <= 1e-12;
    rep.dominance.pass = rep.dominance.residual <= 1e-12;
    return rep;
}

EwinReport expected_window_intensity(const NoiseParams& params, std::size_t realizations) {
    validate_params(params);
    if (realizations == 0)
        throw std::invalid_argument("need at least one realization");

    const auto lw = params.window_len;
    const auto w1 = window_vector(1, lw, params.alpha);
    const auto w3 = window_vector(3, lw, params.alpha);
    const auto w4 = window_vector(4, lw, params.alpha);
    const double s1 = std::accumulate(w1.begin(), w1.end(), 0.0);
    const double s3 = std::accumulate(w3.begin(), w3.end(), 0.0);
    const double s4 = std::accumulate(w4.begin(), w4.end(), 0.0);
    const double w1_first = w1.front();
    const double w1_last = w1.back();
    const double total = 3.0 * static_cast<double>(lw);
    const double lwd = static_cast<double>(lw);

    const Rng rng = Rng(params.seed).fork(kEwinStream);
    double acc_c = 0.0, acc_d = 0.0;
    for (std::size_t r = 0; r < realizations; ++r) {
        const std::uint64_t c = 3 * static_cast<std::uint64_t>(r);
        const double x1 = rng.uniform_at(c);
        const double x2 = rng.uniform_at(c + 1);
        const double x3 = rng.uniform_at(c + 2);

        acc_d += (2.0 * lwd + params.a_d1 * x1 * params.eta * s1 + lwd) / total;

        const double gain = params.a_c1 * x2 * params.eta;
        const double base = 1.0 - params.a_c2 * params.eta + params.a_c3 * params.eta * x3;
        const double mid_sum = gain * s1 + lwd * base;
        const double e_first = gain * w1_first + base;
        const double e_last = gain * w1_last + base;
        // Flank before the peak is the falling taper (case 4) pinned to the
        // middle's first element; the flank after is the rising taper
        // (case 3) pinned to the middle's last element.
        const double flank4 = s4 * (1.0 - e_first) + lwd * e_first;
        const double flank3 = s3 * (1.0 - e_last) + lwd * e_last;
        acc_c += (flank4 + mid_sum + flank3) / total;
    }

    EwinReport rep;
    rep.realizations = realizations;
    rep.compression_mean = acc_c / static_cast<double>(realizations);
    rep.dilation_mean = acc_d / static_cast<double>(realizations);
    rep.e_win = params.p * rep.compression_mean + (1.0 - params.p) * rep.dilation_mean;
    return rep;
}

TuneResult optimize_p(const NoiseParams& params, double target, std::size_t realizations) {
    const EwinReport arms = expected_window_intensity(params, realizations);
    const double mc = arms.compression_mean;
    const double md = arms.dilation_mean;
    auto ewin = [&](double p) { return p * mc + (1.0 - p) * md; };

    if (std::abs(md - mc) <= 1e-9) {  // eta = 0 or degenerate coefficients
        const bool hit = std::abs(md - target) <= 1e-3;
        return {0.5, md, hit};
    }
    if (mc > md)
        throw std::runtime_error(
            "optimize_p: compression arm mean exceeds dilation arm mean; "
            "E_win is not decreasing in p");
    if (target > md || target < mc) {
        const double p = std::abs(md - target) <= std::abs(mc - target) ? 0.0 : 1.0;
        return {p, ewin(p), false};
    }

    double lo = 0.0, hi = 1.0;  // ewin(lo) >= target >= ewin(hi)
    while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        const double e = ewin(mid);
        if (std::abs(e - target) <= 1e-3) return {mid, e, true};
        (e > target ? lo : hi) = mid;
    }
    const double p = 0.5 * (lo + hi);
    return {p, ewin(p), true};
}

Spectrum stray_light(const Spectrum& s, double stray_fraction) {
    if (s.kind != SpectrumKind::Absorption)
        throw std::invalid_argument("stray_light: input must be an absorbance spectrum");
    if (!(stray_fraction >= 0.0))
        throw std::invalid_argument("stray_light: stray fraction must be nonnegative");
    Spectrum out = s;
    for (double& v : out.values)
        v = -std::log10((std::pow(10.0, -v) + stray_fraction) / (1.0 + stray_fraction));
    return out;
}

Spectrum wavelength_shift(const Spectrum& s, double delta_nm) {
    validate_spectrum(s);
    const double shift = delta_nm / s.grid.step;
    if (std::abs(shift - std::round(shift)) > 1e-9)
        throw std::invalid_argument("wavelength_shift: delta must be a whole number of samples");
    const auto k = static_cast<long long>(std::llround(shift));
    if (std::abs(delta_nm) >= s.grid.span() - 1e-12)
        throw std::invalid_argument("wavelength_shift: shift exceeds the spectrum span");

    Spectrum out = s;
    std::fill(out.values.begin(), out.values.end(), kPadValue);
    const auto n = static_cast<long long>(s.values.size());
    for (long long src = 0; src < n; ++src) {
        const long long dst = src + k;
        if (dst >= 0 && dst < n)
            out.values[static_cast<std::size_t>(dst)] = s.values[static_cast<std::size_t>(src)];
    }
    return out;
}

}  // namespace fluorsim
