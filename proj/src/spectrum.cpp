#include "fluorsim/spectrum.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fluorsim {

namespace {

bool near_integer(double x) {
    return std::abs(x - std::round(x)) <= 1e-6;
}

}  // namespace

bool grid_equal(const WavelengthGrid& a, const WavelengthGrid& b) {
    return a.count == b.count && std::abs(a.start - b.start) <= 1e-9 &&
           std::abs(a.step - b.step) <= 1e-12;
}

void validate_spectrum(const Spectrum& s) {
    if (!(s.grid.step > 0.0))
        throw std::invalid_argument("spectrum: grid step must be positive");
    if (s.grid.count < 2)
        throw std::invalid_argument("spectrum: grid needs at least two points");
    if (s.values.size() != s.grid.count)
        throw std::invalid_argument("spectrum: value count does not match grid");
    for (double v : s.values)
        if (!(v >= 0.0))
            throw std::invalid_argument("spectrum: negative or NaN value");
}

double value_at(const Spectrum& s, double nm) {
    const double pos = (nm - s.grid.start) / s.grid.step;
    const double last = static_cast<double>(s.grid.count - 1);
    if (pos < -1e-9 || pos > last + 1e-9)
        throw std::invalid_argument("value_at: wavelength outside grid range");
    if (pos <= 0.0) return s.values.front();
    if (pos >= last) return s.values.back();
    auto i0 = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i0);
    if (frac < 1e-9) return s.values[i0];
    if (frac > 1.0 - 1e-9) return s.values[i0 + 1];
    return s.values[i0] + frac * (s.values[i0 + 1] - s.values[i0]);
}

Spectrum resample(const Spectrum& s, double target_step) {
    validate_spectrum(s);
    if (!(target_step > 0.0))
        throw std::invalid_argument("resample: target step must be positive");
    const double span = s.grid.span();
    if (span + 1e-9 < target_step)
        throw std::invalid_argument("resample: degenerate span");

    const auto count_out =
        static_cast<std::size_t>(std::floor(span / target_step + 1e-9)) + 1;
    Spectrum out;
    out.kind = s.kind;
    out.grid = {s.grid.start, target_step, count_out};
    out.values.resize(count_out);

    const double ratio = target_step / s.grid.step;
    const double last_in = static_cast<double>(s.grid.count - 1);
    for (std::size_t k = 0; k < count_out; ++k) {
        double pos = ratio * static_cast<double>(k);
        if (pos > last_in) pos = last_in;  // guard the 1e-9 span slack
        auto i0 = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(i0);
        if (frac < 1e-9)
            out.values[k] = s.values[i0];
        else if (frac > 1.0 - 1e-9)
            out.values[k] = s.values[i0 + 1];
        else
            out.values[k] = s.values[i0] + frac * (s.values[i0 + 1] - s.values[i0]);
    }
    return out;
}

Spectrum pad_to_range(const Spectrum& s, double global_start, double global_end) {
    validate_spectrum(s);
    const auto& g = s.grid;
    if (global_start > g.start + 1e-9 || global_end < g.end() - 1e-9)
        throw std::invalid_argument("pad_to_range: global range must contain the spectrum");
    const double lead = (g.start - global_start) / g.step;
    const double trail = (global_end - g.end()) / g.step;
    if (!near_integer(lead) || !near_integer(trail) || !near_integer(g.start / g.step))
        throw std::invalid_argument("pad_to_range: misaligned grid phase");

    const auto n_lead = static_cast<std::size_t>(std::llround(lead));
    const auto n_trail = static_cast<std::size_t>(std::llround(trail));
    Spectrum out;
    out.kind = s.kind;
    out.grid = {global_start, g.step, n_lead + g.count + n_trail};
    out.values.assign(out.grid.count, kPadValue);
    for (std::size_t k = 0; k < g.count; ++k)
        out.values[n_lead + k] = s.values[k];
    return out;
}

Spectrum normalize_sum(const Spectrum& s) {
    validate_spectrum(s);
    const double sum = std::accumulate(s.values.begin(), s.values.end(), 0.0);
    if (!(sum > 0.0)) throw std::invalid_argument("normalize_sum: null spectrum");
    Spectrum out = s;
    for (double& v : out.values) v /= sum;
    return out;
}

Spectrum normalize_max(const Spectrum& s) {
    validate_spectrum(s);
    double mx = 0.0;
    for (double v : s.values) mx = std::max(mx, v);
    if (!(mx > 0.0)) throw std::invalid_argument("normalize_max: null spectrum");
    Spectrum out = s;
    for (double& v : out.values) v /= mx;
    return out;
}

Spectrum add_spectra(const std::vector<std::pair<Spectrum, double>>& terms) {
    if (terms.empty())
        throw std::invalid_argument("add_spectra: empty term list");
    const Spectrum& first = terms.front().first;
    validate_spectrum(first);
    for (const auto& [sp, w] : terms) {
        if (!grid_equal(sp.grid, first.grid))
            throw std::invalid_argument("add_spectra: grid mismatch");
        if (sp.kind != first.kind)
            throw std::invalid_argument("add_spectra: kind mismatch");
        if (!(w >= 0.0))
            throw std::invalid_argument("add_spectra: negative weight");
    }
    Spectrum out;
    out.kind = first.kind;
    out.grid = first.grid;
    out.values.assign(first.grid.count, 0.0);
    for (const auto& [sp, w] : terms)
        for (std::size_t k = 0; k < out.values.size(); ++k)
            out.values[k] += w * sp.values[k];
    return out;
}

}  // namespace fluorsim
