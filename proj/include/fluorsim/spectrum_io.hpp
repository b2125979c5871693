#pragma once

#include <filesystem>
#include <string>

#include "fluorsim/spectrum.hpp"

namespace fluorsim {

// Shortest round-trip decimal form; stable across runs, parses back to the
// identical double. Used everywhere a number is serialized so reruns are
// byte-identical.
std::string format_double(double v);

// CSV with header "wavelength_nm,value", ascending uniform wavelengths,
// nonnegative values. Parse errors name the file and 1-based line.
Spectrum read_spectrum_csv(const std::filesystem::path& path, SpectrumKind kind);

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s);

}  // namespace fluorsim
