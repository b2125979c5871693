#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fluorsim/spectrum.hpp"

namespace fluorsim {

// Enumeration ceiling: codes are stored in 32-bit ints and 2^n-1 samples get
// materialized, so the cap is a safety rail, not an algorithmic limit.
inline constexpr std::size_t kMaxChemicals = 24;
inline constexpr double kPathlengthCm = 1.0;           // fixed by assumption
inline constexpr double kAdditivityBoundMolar = 1e-6;  // warn above this

struct ChemicalRecord {
    std::string name;
    std::string solvent;
    double epsilon = 0.0;        // molar extinction at lambda_ex, 1/(M cm)
    double lambda_ex = 0.0;      // nm
    double quantum_yield = 0.0;  // (0, 1]
    Spectrum absorption;         // raw shape, grid-normalized at load
    Spectrum emission;
};

// Bit j-1 set <=> chemical j present; chemical 1 is the rightmost bit.
struct MixtureSpec {
    std::uint32_t code = 0;
    std::vector<double> concentrations;  // molar, one per present chemical,
                                         // ascending chemical index
    double lambda_ex = 0.0;              // nm
    double incident_intensity = 1.0;     // arbitrary units, > 0
};

struct ManifestEntry {
    std::string name;
    std::string solvent;
    double epsilon = 0.0;
    double lambda_ex = 0.0;
    double quantum_yield = 0.0;
    std::filesystem::path absorption_csv;  // resolved against the manifest dir
    std::filesystem::path emission_csv;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// Reads both spectra, resamples to 0.5 nm, pads to the global range, and
// checks the record invariants. Errors carry the record name and field.
ChemicalRecord load_record(const ManifestEntry& entry, double global_start,
                           double global_end);

std::vector<ChemicalRecord> load_manifest(const std::filesystem::path& path,
                                          double global_start = 200.0,
                                          double global_end = 800.0);

// Normalized-database persistence: spectra CSVs plus lock.json recording the
// grid, pad range, and FNV-1a checksums of the source files.
void save_bundle(const std::vector<ChemicalRecord>& db,
                 const std::vector<ManifestEntry>& sources,
                 double global_start, double global_end,
                 const std::filesystem::path& dir);
std::vector<ChemicalRecord> load_bundle(const std::filesystem::path& dir);

std::uint64_t fnv1a_file(const std::filesystem::path& path);

// Beer-Lambert scaling: S_Ab = D_Ab * (epsilon / D_Ab(lambda_ex)) * C, so the
// output at lambda_ex is epsilon*C (pathlength 1 cm folded in).
Spectrum scale_to_molar_absorptivity(const ChemicalRecord& rec, double concentration);

// S_Em = normalize_sum(D_Em) * S_Ab(lambda_ex) * quantum_yield * I_o.
// Proportionality constant fixed at 1: I_o already carries the free scale.
Spectrum emission_spectrum(const ChemicalRecord& rec, const Spectrum& s_ab,
                           double lambda_ex, double incident_intensity);

// All nonzero presence codes, ascending; k_filter keeps popcount == k only.
std::vector<std::uint32_t> enumerate_mixtures(std::size_t n,
                                              std::optional<std::size_t> k_filter = {});

std::string code_to_binary(std::uint32_t code, std::size_t n);

// Throws on hard invariant violations; returns soft warnings (for now only
// the >= 1 uM additivity bound).
std::vector<std::string> validate_mixture(const MixtureSpec& mix, std::size_t db_size);

struct SynthesizedSample {
    Spectrum absorption;
    Spectrum emission;
};

// Additive synthesis over the present chemicals; each chemical's emission is
// scaled by its own absorbance at the shared excitation wavelength.
SynthesizedSample synthesize_sample(const std::vector<ChemicalRecord>& db,
                                    const MixtureSpec& mix,
                                    std::vector<std::string>* warnings = nullptr);

// Absorption-only variant used by the statistical harness (no excitation
// wavelength needed).
Spectrum synthesize_absorption(const std::vector<ChemicalRecord>& db,
                               const MixtureSpec& mix);

}  // namespace fluorsim
