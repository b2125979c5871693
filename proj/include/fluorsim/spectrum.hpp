#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace fluorsim {

// Padding floor: deliberately nonzero so later normalizations never divide
// by an exact zero region.
inline constexpr double kPadValue = 1.0e-20;
inline constexpr double kCanonicalStepNm = 0.5;

// Values at or below this are treated as padding, not measurement. Real
// absorbances sit many decades above; scaled padding many decades below.
inline constexpr double kPadDetect = 1.0e-12;

enum class SpectrumKind { Absorption, Emission };

struct WavelengthGrid {
    double start = 0.0;  // nm
    double step = kCanonicalStepNm;
    std::size_t count = 0;

    double wavelength(std::size_t k) const { return start + step * static_cast<double>(k); }
    double end() const { return wavelength(count - 1); }
    double span() const { return step * static_cast<double>(count - 1); }
};

bool grid_equal(const WavelengthGrid& a, const WavelengthGrid& b);

struct Spectrum {
    WavelengthGrid grid;
    std::vector<double> values;
    SpectrumKind kind = SpectrumKind::Absorption;
};

// Throws std::invalid_argument when the grid/value invariants are broken
// (length mismatch, nonpositive step, count < 2, negative values).
void validate_spectrum(const Spectrum& s);

// Linear interpolation at an arbitrary wavelength inside the grid range;
// exact at grid points.
double value_at(const Spectrum& s, double nm);

// Same span, new step. Exact sample picks where output points coincide with
// input points (decimation, idempotence); linear interpolation elsewhere.
// Spans not divisible by target_step truncate to the last reachable point.
Spectrum resample(const Spectrum& s, double target_step);

// Extends the grid to [global_start, global_end], new positions = kPadValue.
// The grid phase must be anchored to multiples of the step from 0 nm so
// padded spectra from different sources land on identical grids.
Spectrum pad_to_range(const Spectrum& s, double global_start, double global_end);

Spectrum normalize_sum(const Spectrum& s);
Spectrum normalize_max(const Spectrum& s);

// Elementwise weighted sum; all terms must share grid and kind exactly.
Spectrum add_spectra(const std::vector<std::pair<Spectrum, double>>& terms);

}  // namespace fluorsim
