#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fluorsim/chemdb.hpp"
#include "fluorsim/spectrum.hpp"
#include "fluorsim/spectrum_io.hpp"

// Path of the CLI binary under test, forwarded from the harness command line.
extern std::string g_cli_path;

namespace testsupport {

inline fluorsim::Spectrum make_spectrum(double start, double step,
                                        std::vector<double> values,
                                        fluorsim::SpectrumKind kind =
                                            fluorsim::SpectrumKind::Absorption) {
    fluorsim::Spectrum s;
    s.grid = {start, step, values.size()};
    s.values = std::move(values);
    s.kind = kind;
    return s;
}

inline double gauss(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z);
}

// Direct transcription of the printed window pieces (gamma = L-1,
// beta = 1 - alpha/2, inclusive bounds, first match wins), used as an
// independent oracle against window_vector and the noise multipliers.
inline double printed_window(int t, std::size_t lw_i, double alpha, std::size_t j) {
    const double lw = static_cast<double>(lw_i);
    const double jj = static_cast<double>(j);
    const double pi = 3.14159265358979323846;
    if (t == 1) return 0.5 * (1.0 - std::cos(2.0 * pi * jj / lw));
    if (t == 5 || alpha == 0.0) return 1.0;
    const double gamma = lw - 1.0;
    const double beta = 1.0 - alpha / 2.0;
    const double u = 2.0 * (jj - 1.0) / (alpha * gamma);
    const bool rise = (t == 2 || t == 3) && jj <= alpha * gamma / 2.0;
    const bool flat = jj <= gamma * beta;
    if (rise) return 0.5 * (1.0 + std::cos(pi * (u - 1.0)));
    if ((t == 2 || t == 4) && !flat)
        return 0.5 * (1.0 + std::cos(pi * (u - 2.0 / alpha + 1.0)));
    return 1.0;
}

// Synthetic chemical family: one sharp band per chemical (odd indices get a
// second), plus a broad background so every wavelength keeps real absorbance.
inline double band_center(int c) { return 270.0 + 34.0 * c; }

inline double band_abs(int c, double x) {
    double v = 0.85 * gauss(x, band_center(c), 11.0 + c % 3) +
               0.06 * gauss(x, 450.0, 160.0);
    if (c % 2 == 1) v += 0.45 * gauss(x, band_center(c) + 88.0, 9.0);
    return v;
}

inline double band_em(int c, double x) {
    return 0.9 * gauss(x, band_center(c) + 70.0, 18.0) +
           0.05 * gauss(x, band_center(c) + 130.0, 30.0);
}

inline fluorsim::ChemicalRecord make_record(int c, double start = 200.0,
                                            double end = 800.0) {
    fluorsim::ChemicalRecord rec;
    rec.name = "synthetic-" + std::to_string(c + 1);
    rec.solvent = "water";
    rec.epsilon = 48000.0 + 6500.0 * c;
    rec.lambda_ex = band_center(c);
    rec.quantum_yield = 0.18 + 0.045 * (c % 12);

    const auto count = static_cast<std::size_t>(std::llround((end - start) / 0.5)) + 1;
    fluorsim::Spectrum abs, em;
    abs.grid = em.grid = {start, 0.5, count};
    abs.kind = fluorsim::SpectrumKind::Absorption;
    em.kind = fluorsim::SpectrumKind::Emission;
    abs.values.resize(count);
    em.values.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double x = abs.grid.wavelength(k);
        abs.values[k] = band_abs(c, x);
        em.values[k] = band_em(c, x);
    }
    rec.absorption = std::move(abs);
    rec.emission = std::move(em);
    return rec;
}

inline std::vector<fluorsim::ChemicalRecord> synthetic_db(int n) {
    std::vector<fluorsim::ChemicalRecord> db;
    for (int c = 0; c < n; ++c) db.push_back(make_record(c));
    return db;
}

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        auto tmpl = (std::filesystem::temp_directory_path() / "fluorsim-test-XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
        path = buf.data();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

// Writes raw instrument-style CSVs (0.25 nm step, 240-760 nm) plus a manifest,
// so CLI runs exercise the resample and pad paths.
inline std::filesystem::path write_synthetic_manifest(const std::filesystem::path& dir,
                                                      int n) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "raw");
    std::ostringstream manifest;
    manifest << "[\n";
    for (int c = 0; c < n; ++c) {
        const auto count = static_cast<std::size_t>(std::llround((760.0 - 240.0) / 0.25)) + 1;
        fluorsim::Spectrum abs, em;
        abs.grid = em.grid = {240.0, 0.25, count};
        abs.kind = fluorsim::SpectrumKind::Absorption;
        em.kind = fluorsim::SpectrumKind::Emission;
        abs.values.resize(count);
        em.values.resize(count);
        for (std::size_t k = 0; k < count; ++k) {
            const double x = abs.grid.wavelength(k);
            abs.values[k] = band_abs(c, x);
            em.values[k] = band_em(c, x);
        }
        const std::string abs_rel = "raw/chem" + std::to_string(c + 1) + "_abs.csv";
        const std::string em_rel = "raw/chem" + std::to_string(c + 1) + "_em.csv";
        fluorsim::write_spectrum_csv(dir / abs_rel, abs);
        fluorsim::write_spectrum_csv(dir / em_rel, em);

        const auto rec = make_record(c);
        manifest << "  {\"name\": \"" << rec.name << "\", \"solvent\": \"water\","
                 << " \"epsilon_per_M_cm\": " << fluorsim::format_double(rec.epsilon) << ","
                 << " \"lambda_ex_nm\": " << fluorsim::format_double(rec.lambda_ex) << ","
                 << " \"quantum_yield\": " << fluorsim::format_double(rec.quantum_yield) << ","
                 << " \"absorption_csv\": \"" << abs_rel << "\","
                 << " \"emission_csv\": \"" << em_rel << "\"}" << (c + 1 < n ? "," : "")
                 << "\n";
    }
    manifest << "]\n";
    const auto path = dir / "manifest.json";
    std::ofstream out(path);
    out << manifest.str();
    return path;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline CliResult run_cli(const std::vector<std::string>& args) {
    TempDir io;
    const auto out_path = io.path / "out.txt";
    const auto err_path = io.path / "err.txt";
    std::ostringstream cmd;
    cmd << "'" << g_cli_path << "'";
    for (const auto& a : args) cmd << " '" << a << "'";
    cmd << " > '" << out_path.string() << "' 2> '" << err_path.string() << "'";
    const int rc = std::system(cmd.str().c_str());
    CliResult res;
    res.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    res.out = slurp(out_path);
    res.err = slurp(err_path);
    return res;
}

// Byte equality over every regular file in two directory trees.
inline bool trees_identical(const std::filesystem::path& a, const std::filesystem::path& b,
                            std::string* why = nullptr) {
    namespace fs = std::filesystem;
    std::vector<fs::path> rel_a, rel_b;
    for (auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) rel_a.push_back(fs::relative(e.path(), a));
    for (auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) rel_b.push_back(fs::relative(e.path(), b));
    std::sort(rel_a.begin(), rel_a.end());
    std::sort(rel_b.begin(), rel_b.end());
    if (rel_a != rel_b) {
        if (why) *why = "file lists differ";
        return false;
    }
    for (const auto& r : rel_a) {
        if (slurp(a / r) != slurp(b / r)) {
            if (why) *why = "content differs: " + r.string();
            return false;
        }
    }
    return true;
}

}  // namespace testsupport
