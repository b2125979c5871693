#include <doctest.h>

#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "fluorsim/chemdb.hpp"
#include "fluorsim/spectrum_io.hpp"
#include "support.hpp"

using fluorsim::ChemicalRecord;
using fluorsim::MixtureSpec;
using fluorsim::Spectrum;
using fluorsim::SpectrumKind;
using testsupport::TempDir;
using testsupport::gauss;

namespace {

// Minimal in-memory record with an exactly known anchor absorbance.
ChemicalRecord tiny_record(double anchor_value = 0.5) {
    ChemicalRecord rec;
    rec.name = "chlorin-a";
    rec.solvent = "toluene";
    rec.epsilon = 89100.0;
    rec.lambda_ex = 414.0;
    rec.quantum_yield = 0.26;
    const std::size_t count = 121;  // 400..460 nm
    rec.absorption.grid = rec.emission.grid = {400.0, 0.5, count};
    rec.absorption.kind = SpectrumKind::Absorption;
    rec.emission.kind = SpectrumKind::Emission;
    rec.absorption.values.resize(count);
    rec.emission.values.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double x = rec.absorption.grid.wavelength(k);
        rec.absorption.values[k] = anchor_value * gauss(x, 414.0, 6.0);
        rec.emission.values[k] = gauss(x, 440.0, 8.0);
    }
    return rec;
}

}  // namespace

TEST_CASE("enumerate_mixtures reproduces subset counts") {
    const auto all4 = fluorsim::enumerate_mixtures(4);
    REQUIRE(all4.size() == 15);
    std::vector<std::size_t> per_k(5, 0);
    for (auto c : all4) ++per_k[static_cast<std::size_t>(std::popcount(c))];
    CHECK(per_k[1] == 4);
    CHECK(per_k[2] == 6);
    CHECK(per_k[3] == 4);
    CHECK(per_k[4] == 1);
    CHECK(std::is_sorted(all4.begin(), all4.end()));
    CHECK(std::adjacent_find(all4.begin(), all4.end()) == all4.end());

    CHECK(fluorsim::enumerate_mixtures(11).size() == 2047);
    const auto single = fluorsim::enumerate_mixtures(1);
    REQUIRE(single.size() == 1);
    CHECK(single[0] == 1);

    const auto pairs = fluorsim::enumerate_mixtures(5, 2);
    CHECK(pairs.size() == 10);
    for (auto c : pairs) CHECK(std::popcount(c) == 2);
}

TEST_CASE("enumerate_mixtures rejects counts outside the ceiling") {
    CHECK_THROWS_WITH_AS(static_cast<void>(fluorsim::enumerate_mixtures(0)),
                         doctest::Contains("[1, 24]"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(static_cast<void>(fluorsim::enumerate_mixtures(25)),
                         doctest::Contains("kMaxChemicals"), std::invalid_argument);
}

TEST_CASE("code_to_binary puts chemical 1 in the rightmost position") {
    CHECK(fluorsim::code_to_binary(1, 4) == "0001");
    CHECK(fluorsim::code_to_binary(5, 4) == "0101");
    CHECK(fluorsim::code_to_binary(15, 4) == "1111");
    CHECK(fluorsim::code_to_binary(1, 11) == "00000000001");
}

TEST_CASE("scale_to_molar_absorptivity anchors epsilon at lambda_ex") {
    const auto rec = tiny_record(0.5);
    const auto s = fluorsim::scale_to_molar_absorptivity(rec, 1.0e-6);
    CHECK(fluorsim::value_at(s, 414.0) == doctest::Approx(0.0891).epsilon(1e-9));

    const auto s2 = fluorsim::scale_to_molar_absorptivity(rec, 2.0e-6);
    for (std::size_t k = 0; k < s.grid.count; ++k)
        CHECK(s2.values[k] == doctest::Approx(2.0 * s.values[k]).epsilon(1e-15));

    // Elementwise loop oracle.
    const double anchor = fluorsim::value_at(rec.absorption, rec.lambda_ex);
    for (std::size_t k = 0; k < s.grid.count; ++k) {
        const double want = rec.absorption.values[k] * rec.epsilon * 1.0e-6 / anchor;
        CHECK(s.values[k] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("scale_to_molar_absorptivity refuses a padded anchor") {
    auto rec = tiny_record();
    for (auto& v : rec.absorption.values) v = fluorsim::kPadValue;
    CHECK_THROWS_WITH_AS(static_cast<void>(fluorsim::scale_to_molar_absorptivity(rec, 1e-7)),
                         doctest::Contains("padded region"), std::runtime_error);
    CHECK_THROWS_AS(static_cast<void>(fluorsim::scale_to_molar_absorptivity(tiny_record(), 0.0)),
                    std::invalid_argument);
}

TEST_CASE("emission sum equals absorbed fraction times yield times intensity") {
    const auto rec = tiny_record(0.8);
    const auto s_ab = fluorsim::scale_to_molar_absorptivity(rec, 5.0e-7);
    const double i_o = 3.5;
    const auto em = fluorsim::emission_spectrum(rec, s_ab, 414.0, i_o);
    const double absorbed = fluorsim::value_at(s_ab, 414.0);
    const double total = std::accumulate(em.values.begin(), em.values.end(), 0.0);
    CHECK(total / (absorbed * rec.quantum_yield * i_o) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(em.kind == SpectrumKind::Emission);
}

TEST_CASE("emission scales linearly in quantum yield") {
    auto rec = tiny_record();
    const auto s_ab = fluorsim::scale_to_molar_absorptivity(rec, 1.0e-7);
    const auto em1 = fluorsim::emission_spectrum(rec, s_ab, 414.0, 1.0);
    rec.quantum_yield *= 2.0;
    const auto em2 = fluorsim::emission_spectrum(rec, s_ab, 414.0, 1.0);
    for (std::size_t k = 0; k < em1.grid.count; ++k)
        CHECK(em2.values[k] == doctest::Approx(2.0 * em1.values[k]).epsilon(1e-12));
}

TEST_CASE("emission tracks the absorbance at the chosen excitation") {
    const auto rec = tiny_record();
    // Hand-built absorbance: twice as much light absorbed at 410 as at 420.
    Spectrum s_ab = rec.absorption;
    for (std::size_t k = 0; k < s_ab.grid.count; ++k) s_ab.values[k] = 0.1;
    s_ab.values[20] = 0.4;  // 410 nm
    s_ab.values[40] = 0.2;  // 420 nm
    const auto em_hi = fluorsim::emission_spectrum(rec, s_ab, 410.0, 1.0);
    const auto em_lo = fluorsim::emission_spectrum(rec, s_ab, 420.0, 1.0);
    for (std::size_t k = 0; k < em_hi.grid.count; ++k)
        CHECK(em_hi.values[k] == doctest::Approx(2.0 * em_lo.values[k]).epsilon(1e-12));
}

TEST_CASE("emission refuses an excitation on the padding floor") {
    const auto rec = tiny_record();
    Spectrum s_ab = rec.absorption;
    for (auto& v : s_ab.values) v = 1.0;
    s_ab.values[4] = fluorsim::kPadValue;  // 402 nm
    CHECK_THROWS_WITH_AS(static_cast<void>(fluorsim::emission_spectrum(rec, s_ab, 402.0, 1.0)),
                         doctest::Contains("no absorption"), std::runtime_error);
}

TEST_CASE("validate_mixture enforces code and concentration invariants") {
    MixtureSpec mix;
    mix.code = 0;
    mix.concentrations = {};
    CHECK_THROWS_WITH_AS(static_cast<void>(fluorsim::validate_mixture(mix, 4)),
                         doctest::Contains("empty presence code"), std::invalid_argument);

    mix.code = 0b10000;  // chemical 5 of a 4-chemical database
    mix.concentrations = {1e-7};
    CHECK_THROWS_WITH_AS(static_cast<void>(fluorsim::validate_mixture(mix, 4)),
                         doctest::Contains("beyond the database"), std::invalid_argument);

    mix.code = 0b0101;
    mix.concentrations = {1e-7};
    CHECK_THROWS_WITH_AS(static_cast<void>(fluorsim::validate_mixture(mix, 4)),
                         doctest::Contains("one concentration per present"),
                         std::invalid_argument);

    mix.concentrations = {1e-7, -1e-7};
    CHECK_THROWS_AS(static_cast<void>(fluorsim::validate_mixture(mix, 4)),
                    std::invalid_argument);

    mix.concentrations = {1e-7, 1e-7};
    mix.incident_intensity = 0.0;
    CHECK_THROWS_WITH_AS(static_cast<void>(fluorsim::validate_mixture(mix, 4)),
                         doctest::Contains("incident intensity"), std::invalid_argument);

    mix.incident_intensity = 1.0;
    CHECK(fluorsim::validate_mixture(mix, 4).empty());

    mix.concentrations = {1e-7, 2e-6};  // above the additivity bound: warn, not fail
    const auto warnings = fluorsim::validate_mixture(mix, 4);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("additivity") != std::string::npos);
}

TEST_CASE("mixture synthesis is additive over disjoint codes") {
    const auto db = testsupport::synthetic_db(3);
    const double lam = db[0].lambda_ex;

    MixtureSpec a{0b001, {1e-7}, lam, 2.0};
    MixtureSpec b{0b110, {2e-7, 3e-7}, lam, 2.0};
    MixtureSpec both{0b111, {1e-7, 2e-7, 3e-7}, lam, 2.0};

    const auto sa = fluorsim::synthesize_sample(db, a);
    const auto sb = fluorsim::synthesize_sample(db, b);
    const auto sab = fluorsim::synthesize_sample(db, both);

    for (std::size_t k = 0; k < sab.absorption.grid.count; ++k) {
        const double want_abs = sa.absorption.values[k] + sb.absorption.values[k];
        const double want_em = sa.emission.values[k] + sb.emission.values[k];
        CHECK(sab.absorption.values[k] == doctest::Approx(want_abs).epsilon(1e-12));
        CHECK(sab.emission.values[k] == doctest::Approx(want_em).epsilon(1e-12));
    }
}

TEST_CASE("a single-chemical mixture matches the single-chemical pipeline") {
    const auto db = testsupport::synthetic_db(2);
    MixtureSpec mix{0b10, {4e-7}, db[1].lambda_ex, 1.5};
    const auto sample = fluorsim::synthesize_sample(db, mix);
    const auto scaled = fluorsim::scale_to_molar_absorptivity(db[1], 4e-7);
    const auto em = fluorsim::emission_spectrum(db[1], scaled, mix.lambda_ex, 1.5);
    CHECK(sample.absorption.values == scaled.values);
    CHECK(sample.emission.values == em.values);
}

TEST_CASE("scaling every concentration scales the mixture absorbance") {
    const auto db = testsupport::synthetic_db(3);
    MixtureSpec mix{0b111, {1e-7, 2e-7, 3e-7}, db[1].lambda_ex, 1.0};
    const auto base = fluorsim::synthesize_absorption(db, mix);
    const double t = 3.25;
    for (auto& c : mix.concentrations) c *= t;
    const auto scaled = fluorsim::synthesize_absorption(db, mix);
    for (std::size_t k = 0; k < base.grid.count; ++k)
        CHECK(scaled.values[k] == doctest::Approx(t * base.values[k]).epsilon(1e-12));
}

TEST_CASE("synthesis errors carry the offending chemical's name") {
    auto db = testsupport::synthetic_db(2);
    MixtureSpec mix{0b11, {1e-7, 1e-7}, db[0].lambda_ex, 1.0};
    for (auto& v : db[1].absorption.values) v = fluorsim::kPadValue;
    try {
        static_cast<void>(fluorsim::synthesize_sample(db, mix));
        FAIL("expected failure for the padded record");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(db[1].name) != std::string::npos);
    }
}

TEST_CASE("manifest ingestion validates and normalizes records") {
    TempDir dir;
    const auto manifest = testsupport::write_synthetic_manifest(dir.path, 3);
    const auto db = fluorsim::load_manifest(manifest, 200.0, 800.0);
    REQUIRE(db.size() == 3);
    for (const auto& rec : db) {
        CHECK(rec.absorption.grid.start == 200.0);
        CHECK(rec.absorption.grid.step == 0.5);
        CHECK(rec.absorption.grid.count == 1201);
        CHECK(fluorsim::grid_equal(rec.absorption.grid, rec.emission.grid));
        // Raw files covered 240-760; outside that the values are pad floor.
        CHECK(rec.absorption.values.front() == fluorsim::kPadValue);
        CHECK(rec.absorption.values.back() == fluorsim::kPadValue);
        CHECK(fluorsim::value_at(rec.absorption, rec.lambda_ex) > 0.5);
    }
}

TEST_CASE("an empty manifest yields an empty database") {
    TempDir dir;
    const auto p = dir.path / "empty.json";
    std::ofstream(p) << "[]\n";
    CHECK(fluorsim::load_manifest(p).empty());
}

TEST_CASE("manifest ingestion rejects a zero quantum yield by name") {
    TempDir dir;
    testsupport::write_synthetic_manifest(dir.path, 1);
    const auto p = dir.path / "bad.json";
    std::ofstream(p) << "[{\"name\": \"dud\", \"solvent\": \"water\","
                        " \"epsilon_per_M_cm\": 89100, \"lambda_ex_nm\": 414,"
                        " \"quantum_yield\": 0.0,"
                        " \"absorption_csv\": \"raw/chem1_abs.csv\","
                        " \"emission_csv\": \"raw/chem1_em.csv\"}]\n";
    try {
        static_cast<void>(fluorsim::load_manifest(p));
        FAIL("expected rejection");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("dud") != std::string::npos);
        CHECK(msg.find("quantum_yield") != std::string::npos);
    }
}

TEST_CASE("bundles round-trip through save and load") {
    TempDir dir;
    const auto manifest = testsupport::write_synthetic_manifest(dir.path, 2);
    const auto sources = fluorsim::read_manifest(manifest);
    const auto db = fluorsim::load_manifest(manifest, 200.0, 800.0);

    const auto bundle = dir.path / "bundle";
    fluorsim::save_bundle(db, sources, 200.0, 800.0, bundle);
    CHECK(std::filesystem::exists(bundle / "lock.json"));

    const auto back = fluorsim::load_bundle(bundle);
    REQUIRE(back.size() == db.size());
    for (std::size_t i = 0; i < db.size(); ++i) {
        CHECK(back[i].name == db[i].name);
        CHECK(back[i].epsilon == db[i].epsilon);
        CHECK(back[i].lambda_ex == db[i].lambda_ex);
        CHECK(back[i].quantum_yield == db[i].quantum_yield);
        CHECK(back[i].absorption.values == db[i].absorption.values);
        CHECK(back[i].emission.values == db[i].emission.values);
    }
}

TEST_CASE("fnv1a_file matches the reference constants") {
    TempDir dir;
    const auto empty = dir.path / "empty.bin";
    std::ofstream(empty, std::ios::binary);
    CHECK(fluorsim::fnv1a_file(empty) == 0xCBF29CE484222325ull);
    const auto one = dir.path / "one.bin";
    std::ofstream(one, std::ios::binary) << "a";
    CHECK(fluorsim::fnv1a_file(one) == 0xAF63DC4C8601EC8Cull);
}

TEST_CASE("a literature-style record loads with its cited constants") {
    TempDir dir;
    std::filesystem::create_directories(dir.path / "raw");
    // 0.5 nm raw data, 380-470 nm, band anchored at 414 nm.
    Spectrum abs, em;
    abs.grid = em.grid = {380.0, 0.5, 181};
    abs.kind = SpectrumKind::Absorption;
    em.kind = SpectrumKind::Emission;
    abs.values.resize(181);
    em.values.resize(181);
    for (std::size_t k = 0; k < 181; ++k) {
        const double x = abs.grid.wavelength(k);
        abs.values[k] = 0.5 * gauss(x, 414.0, 7.0) + 0.01;
        em.values[k] = gauss(x, 452.0, 9.0) + 0.001;
    }
    fluorsim::write_spectrum_csv(dir.path / "raw" / "c_abs.csv", abs);
    fluorsim::write_spectrum_csv(dir.path / "raw" / "c_em.csv", em);
    const auto p = dir.path / "one.json";
    std::ofstream(p) << "[{\"name\": \"diaryl-chlorin\", \"solvent\": \"toluene\","
                        " \"epsilon_per_M_cm\": 89100, \"lambda_ex_nm\": 414,"
                        " \"quantum_yield\": 0.260,"
                        " \"absorption_csv\": \"raw/c_abs.csv\","
                        " \"emission_csv\": \"raw/c_em.csv\"}]\n";
    const auto db = fluorsim::load_manifest(p, 200.0, 800.0);
    REQUIRE(db.size() == 1);
    CHECK(db[0].epsilon == 89100.0);
    CHECK(db[0].quantum_yield == 0.260);
    const auto s = fluorsim::scale_to_molar_absorptivity(db[0], 1.0e-6);
    CHECK(fluorsim::value_at(s, 414.0) == doctest::Approx(0.0891).epsilon(1e-9));
}
