#include "fluorsim/chemdb.hpp"

#include <bit>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "fluorsim/spectrum_io.hpp"

namespace fluorsim {

namespace {

using nlohmann::json;

[[noreturn]] void record_fail(const std::string& name, const std::string& what) {
    throw std::runtime_error("record '" + name + "': " + what);
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    return j;
}

std::string safe_filename(const std::string& name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.'
                          ? c
                          : '_');
    return out;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

void check_record(const ChemicalRecord& rec) {
    if (!(rec.epsilon > 0.0))
        record_fail(rec.name, "epsilon_per_M_cm must be positive");
    if (!(rec.quantum_yield > 0.0) || rec.quantum_yield > 1.0)
        record_fail(rec.name, "quantum_yield must be in (0, 1]");
    const auto& g = rec.absorption.grid;
    if (rec.lambda_ex < g.start - 1e-9 || rec.lambda_ex > g.end() + 1e-9)
        record_fail(rec.name, "lambda_ex_nm outside the absorption grid");
    if (value_at(rec.absorption, rec.lambda_ex) <= kPadDetect)
        record_fail(rec.name, "absorption at lambda_ex_nm sits on the padding floor");
    if (!grid_equal(rec.absorption.grid, rec.emission.grid))
        record_fail(rec.name, "absorption and emission grids differ after preprocessing");
}

}  // namespace

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    const json j = load_json(path);
    if (!j.is_array())
        throw std::runtime_error(path.string() + ": manifest must be a JSON array");
    const auto base = path.has_parent_path() ? path.parent_path()
                                             : std::filesystem::path(".");

    std::vector<ManifestEntry> entries;
    for (const auto& item : j) {
        ManifestEntry e;
        try {
            e.name = item.at("name").get<std::string>();
            e.solvent = item.at("solvent").get<std::string>();
            e.epsilon = item.at("epsilon_per_M_cm").get<double>();
            e.lambda_ex = item.at("lambda_ex_nm").get<double>();
            e.quantum_yield = item.at("quantum_yield").get<double>();
            e.absorption_csv = base / item.at("absorption_csv").get<std::string>();
            e.emission_csv = base / item.at("emission_csv").get<std::string>();
        } catch (const json::exception& ex) {
            throw std::runtime_error(path.string() + ": " +
                                     (e.name.empty() ? "entry" : "record '" + e.name + "'") +
                                     ": " + ex.what());
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

ChemicalRecord load_record(const ManifestEntry& entry, double global_start,
                           double global_end) {
    ChemicalRecord rec;
    rec.name = entry.name;
    rec.solvent = entry.solvent;
    rec.epsilon = entry.epsilon;
    rec.lambda_ex = entry.lambda_ex;
    rec.quantum_yield = entry.quantum_yield;
    try {
        rec.absorption = pad_to_range(
            resample(read_spectrum_csv(entry.absorption_csv, SpectrumKind::Absorption),
                     kCanonicalStepNm),
            global_start, global_end);
        rec.emission = pad_to_range(
            resample(read_spectrum_csv(entry.emission_csv, SpectrumKind::Emission),
                     kCanonicalStepNm),
            global_start, global_end);
    } catch (const std::exception& ex) {
        record_fail(rec.name, ex.what());
    }
    check_record(rec);
    return rec;
}

std::vector<ChemicalRecord> load_manifest(const std::filesystem::path& path,
                                          double global_start, double global_end) {
    std::vector<ChemicalRecord> db;
    for (const auto& entry : read_manifest(path))
        db.push_back(load_record(entry, global_start, global_end));
    return db;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::uint64_t h = 0xCBF29CE484222325ull;
    char buf[1 << 14];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001B3ull;
        }
        if (!in) break;
    }
    return h;
}

void save_bundle(const std::vector<ChemicalRecord>& db,
                 const std::vector<ManifestEntry>& sources,
                 double global_start, double global_end,
                 const std::filesystem::path& dir) {
    if (db.size() != sources.size())
        throw std::invalid_argument("save_bundle: record/source count mismatch");
    std::filesystem::create_directories(dir / "spectra");

    json lock;
    lock["step_nm"] = kCanonicalStepNm;
    lock["global_start_nm"] = global_start;
    lock["global_end_nm"] = global_end;
    lock["records"] = json::array();
    for (std::size_t i = 0; i < db.size(); ++i) {
        const auto& rec = db[i];
        const std::string stem = safe_filename(rec.name);
        const std::string abs_rel = "spectra/" + stem + "_abs.csv";
        const std::string em_rel = "spectra/" + stem + "_em.csv";
        write_spectrum_csv(dir / abs_rel, rec.absorption);
        write_spectrum_csv(dir / em_rel, rec.emission);
        json r;
        r["name"] = rec.name;
        r["solvent"] = rec.solvent;
        r["epsilon_per_M_cm"] = rec.epsilon;
        r["lambda_ex_nm"] = rec.lambda_ex;
        r["quantum_yield"] = rec.quantum_yield;
        r["absorption_csv"] = abs_rel;
        r["emission_csv"] = em_rel;
        r["absorption_source_fnv1a"] = hex64(fnv1a_file(sources[i].absorption_csv));
        r["emission_source_fnv1a"] = hex64(fnv1a_file(sources[i].emission_csv));
        lock["records"].push_back(std::move(r));
    }

    std::ofstream out(dir / "lock.json", std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / "lock.json").string());
    out << lock.dump(2) << '\n';
}

std::vector<ChemicalRecord> load_bundle(const std::filesystem::path& dir) {
    const json lock = load_json(dir / "lock.json");
    std::vector<ChemicalRecord> db;
    for (const auto& r : lock.at("records")) {
        ChemicalRecord rec;
        rec.name = r.at("name").get<std::string>();
        rec.solvent = r.at("solvent").get<std::string>();
        rec.epsilon = r.at("epsilon_per_M_cm").get<double>();
        rec.lambda_ex = r.at("lambda_ex_nm").get<double>();
        rec.quantum_yield = r.at("quantum_yield").get<double>();
        rec.absorption = read_spectrum_csv(dir / r.at("absorption_csv").get<std::string>(),
                                           SpectrumKind::Absorption);
        rec.emission = read_spectrum_csv(dir / r.at("emission_csv").get<std::string>(),
                                         SpectrumKind::Emission);
        check_record(rec);
        db.push_back(std::move(rec));
    }
    return db;
}

Spectrum scale_to_molar_absorptivity(const ChemicalRecord& rec, double concentration) {
    if (!(concentration > 0.0))
        throw std::invalid_argument("scale_to_molar_absorptivity: concentration must be positive");
    const double anchor = value_at(rec.absorption, rec.lambda_ex);
    if (anchor <= kPadDetect)
        throw std::runtime_error("record '" + rec.name + "': epsilon anchor on padded region");
    const double scale = rec.epsilon / anchor * concentration;
    Spectrum out = rec.absorption;
    for (double& v : out.values) v *= scale;
    return out;
}

Spectrum emission_spectrum(const ChemicalRecord& rec, const Spectrum& s_ab,
                           double lambda_ex, double incident_intensity) {
    if (!(incident_intensity > 0.0))
        throw std::invalid_argument("emission_spectrum: incident intensity must be positive");
    double mx = 0.0;
    for (double v : s_ab.values) mx = std::max(mx, v);
    const double absorbed = value_at(s_ab, lambda_ex);
    if (!(mx > 0.0) || absorbed <= mx * 1e-12)
        throw std::runtime_error("record '" + rec.name +
                                 "': no absorption at the excitation wavelength");
    Spectrum out = normalize_sum(rec.emission);
    const double scale = absorbed * rec.quantum_yield * incident_intensity;
    for (double& v : out.values) v *= scale;
    return out;
}

std::vector<std::uint32_t> enumerate_mixtures(std::size_t n,
                                              std::optional<std::size_t> k_filter) {
    if (n < 1 || n > kMaxChemicals)
        throw std::invalid_argument(
            "enumerate_mixtures: chemical count must be in [1, " +
            std::to_string(kMaxChemicals) + "]; raise kMaxChemicals to go higher");
    const std::uint32_t top = (1u << n) - 1u;
    std::vector<std::uint32_t> codes;
    for (std::uint32_t c = 1; c <= top; ++c) {
        if (k_filter && std::popcount(c) != static_cast<int>(*k_filter)) continue;
        codes.push_back(c);
    }
    return codes;
}

std::string code_to_binary(std::uint32_t code, std::size_t n) {
    std::string s(n, '0');
    for (std::size_t j = 0; j < n; ++j)
        if (code & (1u << j)) s[n - 1 - j] = '1';
    return s;
}

std::vector<std::string> validate_mixture(const MixtureSpec& mix, std::size_t db_size) {
    if (mix.code == 0) throw std::invalid_argument("mixture: empty presence code");
    if (db_size < 32 && (mix.code >> db_size) != 0)
        throw std::invalid_argument("mixture: code has bits beyond the database size");
    const auto present = static_cast<std::size_t>(std::popcount(mix.code));
    if (mix.concentrations.size() != present)
        throw std::invalid_argument("mixture: need one concentration per present chemical");
    std::vector<std::string> warnings;
    for (double c : mix.concentrations) {
        if (!(c > 0.0)) throw std::invalid_argument("mixture: concentrations must be positive");
        if (c >= kAdditivityBoundMolar)
            warnings.push_back("concentration " + std::to_string(c) +
                               " M is at or above the 1e-6 M additivity bound");
    }
    if (!(mix.incident_intensity > 0.0))
        throw std::invalid_argument("mixture: incident intensity must be positive");
    return warnings;
}

SynthesizedSample synthesize_sample(const std::vector<ChemicalRecord>& db,
                                    const MixtureSpec& mix,
                                    std::vector<std::string>* warnings) {
    auto warn = validate_mixture(mix, db.size());
    if (warnings) warnings->insert(warnings->end(), warn.begin(), warn.end());

    std::vector<std::pair<Spectrum, double>> abs_terms, em_terms;
    std::size_t ci = 0;
    for (std::size_t j = 0; j < db.size(); ++j) {
        if (!(mix.code & (1u << j))) continue;
        const auto& rec = db[j];
        try {
            Spectrum scaled = scale_to_molar_absorptivity(rec, mix.concentrations[ci]);
            Spectrum em = emission_spectrum(rec, scaled, mix.lambda_ex, mix.incident_intensity);
            abs_terms.emplace_back(std::move(scaled), 1.0);
            em_terms.emplace_back(std::move(em), 1.0);
        } catch (const std::exception& ex) {
            throw std::runtime_error("chemical '" + rec.name + "': " + ex.what());
        }
        ++ci;
    }
    return {add_spectra(abs_terms), add_spectra(em_terms)};
}

Spectrum synthesize_absorption(const std::vector<ChemicalRecord>& db,
                               const MixtureSpec& mix) {
    validate_mixture(mix, db.size());
    std::vector<std::pair<Spectrum, double>> terms;
    std::size_t ci = 0;
    for (std::size_t j = 0; j < db.size(); ++j) {
        if (!(mix.code & (1u << j))) continue;
        terms.emplace_back(scale_to_molar_absorptivity(db[j], mix.concentrations[ci]), 1.0);
        ++ci;
    }
    return add_spectra(terms);
}

}  // namespace fluorsim
