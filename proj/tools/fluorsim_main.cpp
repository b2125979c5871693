// fluorsim command line driver.
//
// Subcommands: ingest, generate, validate, tune-p.  Every command that
// produces an output directory writes it atomically (temp dir + rename)
// and drops a run.json inside it with the fully resolved configuration,
// seed included.  Re-running with --from-run against that file yields a
// byte-identical tree, which is what the reproducibility tests compare.
//
// Exit codes: 0 success (validate: all evaluated guidelines pass),
// 1 guideline failure, 2 usage error, 3 data error.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "fluorsim/chemdb.hpp"
#include "fluorsim/noise.hpp"
#include "fluorsim/rng.hpp"
#include "fluorsim/spectrum.hpp"
#include "fluorsim/spectrum_io.hpp"
#include "fluorsim/validation.hpp"
#include "fluorsim/windowing.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitGuidelineFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

// ---------------------------------------------------------------------------
// Configuration blocks mirrored into run.json.

struct NoiseConfig {
    std::string model = "optimized";
    fluorsim::NoiseParams params;
    std::optional<double> stray_fraction;
    std::optional<double> shift_nm;
};

json noise_to_json(const NoiseConfig& nc) {
    json j;
    j["model"] = nc.model;
    j["eta"] = nc.params.eta;
    j["alpha"] = nc.params.alpha;
    j["window_len"] = nc.params.window_len;
    j["p"] = nc.params.p;
    j["a_c1"] = nc.params.a_c1;
    j["a_c2"] = nc.params.a_c2;
    j["a_c3"] = nc.params.a_c3;
    j["a_d1"] = nc.params.a_d1;
    j["seed"] = nc.params.seed;
    j["stray_fraction"] = nc.stray_fraction ? json(*nc.stray_fraction) : json(nullptr);
    j["shift_nm"] = nc.shift_nm ? json(*nc.shift_nm) : json(nullptr);
    return j;
}

NoiseConfig noise_from_json(const json& j) {
    NoiseConfig nc;
    nc.model = j.at("model").get<std::string>();
    nc.params.eta = j.at("eta").get<double>();
    nc.params.alpha = j.at("alpha").get<double>();
    nc.params.window_len = j.at("window_len").get<std::size_t>();
    nc.params.p = j.at("p").get<double>();
    nc.params.a_c1 = j.at("a_c1").get<double>();
    nc.params.a_c2 = j.at("a_c2").get<double>();
    nc.params.a_c3 = j.at("a_c3").get<double>();
    nc.params.a_d1 = j.at("a_d1").get<double>();
    nc.params.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("stray_fraction") && !j.at("stray_fraction").is_null())
        nc.stray_fraction = j.at("stray_fraction").get<double>();
    if (j.contains("shift_nm") && !j.at("shift_nm").is_null())
        nc.shift_nm = j.at("shift_nm").get<double>();
    return nc;
}

struct GenerateConfig {
    std::string bundle;
    std::optional<std::size_t> k_filter;
    double concentration = 1e-7;
    std::optional<double> lambda_ex;  // absent: first present chemical's table value
    double incident = 1.0;
    NoiseConfig noise;
};

json generate_to_json(const GenerateConfig& c) {
    json j;
    j["command"] = "generate";
    j["bundle"] = c.bundle;
    j["k_filter"] = c.k_filter ? json(*c.k_filter) : json(nullptr);
    j["concentration_molar"] = c.concentration;
    j["lambda_ex_nm"] = c.lambda_ex ? json(*c.lambda_ex) : json(nullptr);
    j["incident_intensity"] = c.incident;
    j["noise"] = noise_to_json(c.noise);
    return j;
}

GenerateConfig generate_from_json(const json& j) {
    if (j.at("command").get<std::string>() != "generate")
        throw std::invalid_argument("run file was not produced by 'generate'");
    GenerateConfig c;
    c.bundle = j.at("bundle").get<std::string>();
    if (!j.at("k_filter").is_null()) c.k_filter = j.at("k_filter").get<std::size_t>();
    c.concentration = j.at("concentration_molar").get<double>();
    if (!j.at("lambda_ex_nm").is_null()) c.lambda_ex = j.at("lambda_ex_nm").get<double>();
    c.incident = j.at("incident_intensity").get<double>();
    c.noise = noise_from_json(j.at("noise"));
    return c;
}

struct ValidateConfig {
    std::string bundle;
    std::vector<double> etas;  // size 1 unless a sweep was requested
    std::size_t n_samples = 1000;
    double concentration = 1e-7;
    std::size_t bins = 60;
    double mean_gate = 0.02;
    double skew_gate = 0.5;
    NoiseConfig noise;  // noise.params.eta holds etas.front()
};

json validate_to_json(const ValidateConfig& c) {
    json j;
    j["command"] = "validate";
    j["bundle"] = c.bundle;
    j["eta_sweep"] = c.etas;
    j["n_samples"] = c.n_samples;
    j["concentration_molar"] = c.concentration;
    j["bins"] = c.bins;
    j["mean_gate"] = c.mean_gate;
    j["skew_gate"] = c.skew_gate;
    j["noise"] = noise_to_json(c.noise);
    return j;
}

ValidateConfig validate_from_json(const json& j) {
    if (j.at("command").get<std::string>() != "validate")
        throw std::invalid_argument("run file was not produced by 'validate'");
    ValidateConfig c;
    c.bundle = j.at("bundle").get<std::string>();
    c.etas = j.at("eta_sweep").get<std::vector<double>>();
    c.n_samples = j.at("n_samples").get<std::size_t>();
    c.concentration = j.at("concentration_molar").get<double>();
    c.bins = j.at("bins").get<std::size_t>();
    c.mean_gate = j.at("mean_gate").get<double>();
    c.skew_gate = j.at("skew_gate").get<double>();
    c.noise = noise_from_json(j.at("noise"));
    return c;
}

json load_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open run file '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("run file '" + path.string() + "': " + e.what());
    }
    return j;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_json_file(const fs::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

// Output directories are staged in a sibling temp dir and renamed into
// place on commit, so an aborted run never leaves a partial tree.
class AtomicDir {
  public:
    explicit AtomicDir(const fs::path& target) : target_(target) {
        if (fs::exists(target_))
            throw std::invalid_argument("output path '" + target_.string() + "' already exists");
        fs::path parent = target_.has_parent_path() ? target_.parent_path() : fs::path(".");
        fs::create_directories(parent);
        tmp_ = parent / (target_.filename().string() + ".tmp-" + std::to_string(::getpid()));
        fs::remove_all(tmp_);
        fs::create_directories(tmp_);
    }
    AtomicDir(const AtomicDir&) = delete;
    AtomicDir& operator=(const AtomicDir&) = delete;
    ~AtomicDir() {
        if (!committed_) {
            std::error_code ec;
            fs::remove_all(tmp_, ec);
        }
    }

    const fs::path& staging() const { return tmp_; }
    void commit() {
        fs::rename(tmp_, target_);
        committed_ = true;
    }

  private:
    fs::path target_;
    fs::path tmp_;
    bool committed_ = false;
};

// ---------------------------------------------------------------------------
// Shared helpers.

std::vector<double> model_multiplier(fluorsim::NoiseModel model,
                                     const fluorsim::WindowPlan& plan,
                                     const fluorsim::NoiseParams& params,
                                     const fluorsim::Rng& rng) {
    switch (model) {
        case fluorsim::NoiseModel::Dilate:
            return fluorsim::dilation_multiplier(plan, params.eta);
        case fluorsim::NoiseModel::Compress:
            return fluorsim::compression_multiplier(plan, params.eta);
        case fluorsim::NoiseModel::Failure:
            return fluorsim::failure_multiplier(plan, params.eta, rng);
        case fluorsim::NoiseModel::Optimized:
            return fluorsim::optimized_multiplier(plan, params, rng);
    }
    throw std::logic_error("unhandled noise model");
}

fluorsim::Spectrum apply_noise(const fluorsim::Spectrum& clean, fluorsim::NoiseModel model,
                               const fluorsim::NoiseParams& params, const fluorsim::Rng& rng) {
    const fluorsim::WindowPlan plan =
        fluorsim::build_plan(clean, params.window_len, params.alpha);
    return fluorsim::apply_multiplier(clean, model_multiplier(model, plan, params, rng));
}

std::string sample_id(std::uint32_t code, std::size_t n_chemicals) {
    const std::string max_code = std::to_string((1u << n_chemicals) - 1u);
    std::string id = std::to_string(code);
    if (id.size() < max_code.size()) id.insert(0, max_code.size() - id.size(), '0');
    return id;
}

void report_constraint_warnings(const fluorsim::NoiseParams& params) {
    const fluorsim::ConstraintReport cr = fluorsim::check_constraints(params);
    if (!cr.balance.pass)
        std::cerr << "warning: coefficient balance constraint violated (residual "
                  << fluorsim::format_double(cr.balance.residual) << ")\n";
    if (!cr.variance.pass)
        std::cerr << "warning: coefficient variance constraint violated (residual "
                  << fluorsim::format_double(cr.variance.residual) << ")\n";
    if (!cr.dominance.pass)
        std::cerr << "warning: coefficient dominance constraint violated (residual "
                  << fluorsim::format_double(cr.dominance.residual) << ")\n";
}

// ---------------------------------------------------------------------------
// ingest

int run_ingest(const std::string& manifest, const std::string& out,
               double global_start, double global_end) {
    const std::vector<fluorsim::ManifestEntry> entries = fluorsim::read_manifest(manifest);
    std::vector<fluorsim::ChemicalRecord> db;
    db.reserve(entries.size());
    for (const fluorsim::ManifestEntry& e : entries)
        db.push_back(fluorsim::load_record(e, global_start, global_end));

    AtomicDir dir(out);
    fluorsim::save_bundle(db, entries, global_start, global_end, dir.staging());

    json run;
    run["command"] = "ingest";
    run["manifest"] = manifest;
    run["global_start_nm"] = global_start;
    run["global_end_nm"] = global_end;
    run["seed"] = 0;
    write_json_file(dir.staging() / "run.json", run);
    dir.commit();

    std::cout << "ingested " << db.size() << " record" << (db.size() == 1 ? "" : "s")
              << " -> " << out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// generate

int run_generate(const GenerateConfig& cfg, const std::string& out) {
    fluorsim::validate_params(cfg.noise.params);
    const fluorsim::NoiseModel model = fluorsim::parse_noise_model(cfg.noise.model);
    report_constraint_warnings(cfg.noise.params);
    const std::vector<fluorsim::ChemicalRecord> db = fluorsim::load_bundle(cfg.bundle);
    if (db.empty()) throw std::runtime_error("bundle '" + cfg.bundle + "' holds no records");

    const std::vector<std::uint32_t> codes =
        fluorsim::enumerate_mixtures(db.size(), cfg.k_filter);
    if (codes.empty())
        throw std::invalid_argument("presence-count filter leaves no mixtures to generate");

    const fluorsim::Rng root(cfg.noise.params.seed);
    AtomicDir dir(out);
    const fs::path samples = dir.staging() / "samples";
    fs::create_directories(samples);

    std::ostringstream labels;
    labels << "id,code_binary,code_int,lambda_ex_nm,incident_intensity,concentrations\n";

    for (std::size_t i = 0; i < codes.size(); ++i) {
        const std::uint32_t code = codes[i];
        fluorsim::MixtureSpec mix;
        mix.code = code;
        mix.incident_intensity = cfg.incident;
        std::size_t first_present = db.size();
        std::ostringstream conc;
        bool first_field = true;
        for (std::size_t c = 0; c < db.size(); ++c) {
            if ((code >> c) & 1u) {
                if (first_present == db.size()) first_present = c;
                mix.concentrations.push_back(cfg.concentration);
                if (!first_field) conc << ";";
                conc << db[c].name << "=" << fluorsim::format_double(cfg.concentration);
                first_field = false;
            }
        }
        mix.lambda_ex = cfg.lambda_ex ? *cfg.lambda_ex : db[first_present].lambda_ex;

        std::vector<std::string> warnings;
        const fluorsim::SynthesizedSample sample =
            fluorsim::synthesize_sample(db, mix, &warnings);
        const std::string id = sample_id(code, db.size());
        for (const std::string& w : warnings)
            std::cerr << "warning: sample " << id << ": " << w << "\n";

        const fluorsim::Rng sample_rng = root.fork(i);
        fluorsim::Spectrum abs_noisy =
            apply_noise(sample.absorption, model, cfg.noise.params, sample_rng.fork(1));
        fluorsim::Spectrum em_noisy =
            apply_noise(sample.emission, model, cfg.noise.params, sample_rng.fork(2));
        if (cfg.noise.stray_fraction)
            abs_noisy = fluorsim::stray_light(abs_noisy, *cfg.noise.stray_fraction);
        if (cfg.noise.shift_nm) {
            abs_noisy = fluorsim::wavelength_shift(abs_noisy, *cfg.noise.shift_nm);
            em_noisy = fluorsim::wavelength_shift(em_noisy, *cfg.noise.shift_nm);
        }

        fluorsim::write_spectrum_csv(samples / (id + "_abs.csv"), sample.absorption);
        fluorsim::write_spectrum_csv(samples / (id + "_em.csv"), sample.emission);
        fluorsim::write_spectrum_csv(samples / (id + "_abs_noisy.csv"), abs_noisy);
        fluorsim::write_spectrum_csv(samples / (id + "_em_noisy.csv"), em_noisy);

        labels << id << "," << fluorsim::code_to_binary(code, db.size()) << "," << code << ","
               << fluorsim::format_double(mix.lambda_ex) << ","
               << fluorsim::format_double(cfg.incident) << "," << conc.str() << "\n";
    }

    write_text_file(dir.staging() / "labels.csv", labels.str());
    write_json_file(dir.staging() / "run.json", generate_to_json(cfg));
    dir.commit();

    std::cout << "wrote " << codes.size() << " sample" << (codes.size() == 1 ? "" : "s")
              << " -> " << out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// validate

json summary_to_json(const fluorsim::SummaryStats& s) {
    json j;
    j["count"] = s.count;
    j["mean"] = s.mean;
    j["stddev"] = s.stddev;
    j["skewness"] = s.skewness;
    j["fraction_positive"] = s.fraction_positive;
    return j;
}

void write_histogram_csv(const std::vector<double>& data, std::size_t bins,
                         const fs::path& path) {
    double low = 0.0, high = 0.0;
    if (!data.empty()) {
        low = *std::min_element(data.begin(), data.end());
        high = *std::max_element(data.begin(), data.end());
    }
    if (!(high > low)) {
        low -= 0.5;
        high += 0.5;
    }
    const fluorsim::HistogramReport h = fluorsim::histogram(data, bins, low, high);
    std::ostringstream csv;
    csv << "bin_low,bin_high,count\n";
    const double width = (h.high - h.low) / static_cast<double>(h.counts.size());
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        const double lo = h.low + width * static_cast<double>(b);
        const double hi = (b + 1 == h.counts.size()) ? h.high
                                                     : h.low + width * static_cast<double>(b + 1);
        csv << fluorsim::format_double(lo) << "," << fluorsim::format_double(hi) << ","
            << h.counts[b] << "\n";
    }
    write_text_file(path, csv.str());
}

int run_validate(const ValidateConfig& cfg, const std::string& out) {
    if (cfg.n_samples == 0) throw std::invalid_argument("--n-samples must be positive");
    if (cfg.bins == 0) throw std::invalid_argument("--bins must be positive");
    if (cfg.etas.empty()) throw std::invalid_argument("at least one eta value is required");
    const fluorsim::NoiseModel model = fluorsim::parse_noise_model(cfg.noise.model);
    for (double eta : cfg.etas) {
        fluorsim::NoiseParams p = cfg.noise.params;
        p.eta = eta;
        fluorsim::validate_params(p);
    }
    report_constraint_warnings(cfg.noise.params);

    const std::vector<fluorsim::ChemicalRecord> db = fluorsim::load_bundle(cfg.bundle);

    std::vector<fluorsim::IntensityStudy> studies;
    studies.reserve(cfg.etas.size());
    for (double eta : cfg.etas) {
        fluorsim::NoiseParams p = cfg.noise.params;
        p.eta = eta;
        studies.push_back(fluorsim::run_study(db, model, p, cfg.n_samples,
                                              fluorsim::Rng(cfg.noise.params.seed),
                                              cfg.concentration));
    }
    const fluorsim::GuidelineReport report =
        fluorsim::guideline_report(studies, cfg.mean_gate, cfg.skew_gate);

    AtomicDir dir(out);

    json rep;
    rep["model"] = cfg.noise.model;
    rep["n_samples"] = cfg.n_samples;
    json jparams = noise_to_json(cfg.noise);
    jparams.erase("model");
    jparams["eta_sweep"] = cfg.etas;
    rep["params"] = jparams;
    if (studies.size() == 1) {
        rep["summary_element"] = summary_to_json(studies[0].summary_element);
        rep["summary_vector"] = summary_to_json(studies[0].summary_vector);
    } else {
        json arr = json::array();
        for (std::size_t s = 0; s < studies.size(); ++s) {
            json e;
            e["eta"] = cfg.etas[s];
            e["summary_element"] = summary_to_json(studies[s].summary_element);
            e["summary_vector"] = summary_to_json(studies[s].summary_vector);
            arr.push_back(std::move(e));
        }
        rep["studies"] = arr;
        rep["summary_element"] = summary_to_json(studies.back().summary_element);
        rep["summary_vector"] = summary_to_json(studies.back().summary_vector);
    }
    json guides;
    guides["g1"] = fluorsim::guideline_status_name(report.g1);
    guides["g2"] = fluorsim::guideline_status_name(report.g2);
    guides["g3"] = fluorsim::guideline_status_name(report.g3);
    guides["g4"] = fluorsim::guideline_status_name(report.g4);
    guides["g5"] = fluorsim::guideline_status_name(report.g5);
    rep["guidelines"] = guides;
    write_json_file(dir.staging() / "report.json", rep);

    for (std::size_t s = 0; s < studies.size(); ++s) {
        const std::string tag = "eta" + fluorsim::format_double(cfg.etas[s]);
        write_histogram_csv(studies[s].delta_element, cfg.bins,
                            dir.staging() / ("hist_element_" + tag + ".csv"));
        write_histogram_csv(studies[s].delta_vector, cfg.bins,
                            dir.staging() / ("hist_vector_" + tag + ".csv"));
    }
    write_json_file(dir.staging() / "run.json", validate_to_json(cfg));
    dir.commit();

    std::cout << "g1 " << fluorsim::guideline_status_name(report.g1) << "\n"
              << "g2 " << fluorsim::guideline_status_name(report.g2) << "\n"
              << "g3 " << fluorsim::guideline_status_name(report.g3) << "\n"
              << "g4 " << fluorsim::guideline_status_name(report.g4) << "\n"
              << "g5 " << fluorsim::guideline_status_name(report.g5) << "\n";
    return report.all_evaluated_pass() ? kExitOk : kExitGuidelineFail;
}

// ---------------------------------------------------------------------------
// tune-p

int run_tune(const fluorsim::NoiseParams& params, double target, std::size_t realizations) {
    fluorsim::validate_params(params);
    report_constraint_warnings(params);

    const fluorsim::TuneResult res = fluorsim::optimize_p(params, target, realizations);
    if (!res.reachable)
        std::cerr << "warning: target " << fluorsim::format_double(target)
                  << " is outside the reachable range; reporting the closest boundary\n";

    std::cout << "p_star," << fluorsim::format_double(res.p) << "\n";
    std::cout << "e_win_p_star," << fluorsim::format_double(res.e_win) << "\n";
    std::cout << "p,e_win\n";
    for (int i = 0; i <= 10; ++i) {
        fluorsim::NoiseParams pt = params;
        pt.p = static_cast<double>(i) / 10.0;
        const fluorsim::EwinReport r = fluorsim::expected_window_intensity(pt, realizations);
        std::cout << fluorsim::format_double(pt.p) << ","
                  << fluorsim::format_double(r.e_win) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fluorescence spectrum synthesis and noise-model validation"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "build a chemical bundle from a manifest");
    std::string in_manifest, in_out;
    double in_start = 200.0, in_end = 800.0;
    ingest->add_option("--manifest", in_manifest, "manifest JSON path")->required();
    ingest->add_option("--out", in_out, "output bundle directory")->required();
    ingest->add_option("--global-start", in_start, "canonical grid start, nm");
    ingest->add_option("--global-end", in_end, "canonical grid end, nm");

    GenerateConfig gen;
    ValidateConfig val;
    std::string gen_out, val_out, gen_from, val_from;
    std::uint64_t gen_seed = 0, val_seed = 0;
    std::size_t gen_k = 0;
    double gen_lambda = 0.0, gen_stray = 0.0, gen_shift = 0.0;
    std::string val_sweep;

    auto add_noise_options = [](CLI::App* sub, NoiseConfig& nc) {
        sub->add_option("--model", nc.model, "dilate | compress | failure | optimized");
        sub->add_option("--eta", nc.params.eta, "noise amplitude in [0, 1]");
        sub->add_option("--alpha", nc.params.alpha, "taper ratio in [0, 1]");
        sub->add_option("--window-len", nc.params.window_len, "designed window length");
        sub->add_option("--p", nc.params.p, "compression probability for the optimized model");
        sub->add_option("--a-c1", nc.params.a_c1, "compression gain coefficient");
        sub->add_option("--a-c2", nc.params.a_c2, "compression base coefficient");
        sub->add_option("--a-c3", nc.params.a_c3, "compression jitter coefficient");
        sub->add_option("--a-d1", nc.params.a_d1, "dilation gain coefficient");
    };

    auto* generate = app.add_subcommand("generate", "synthesize a labeled mixture dataset");
    generate->add_option("--bundle", gen.bundle, "chemical bundle directory");
    generate->add_option("--out", gen_out, "output dataset directory")->required();
    auto* gen_seed_opt = generate->add_option("--seed", gen_seed, "RNG seed (required)");
    auto* gen_k_opt = generate->add_option("--k", gen_k, "keep only mixtures with k chemicals");
    generate->add_option("--concentration", gen.concentration,
                         "molar concentration per present chemical");
    auto* gen_lambda_opt = generate->add_option(
        "--lambda-ex", gen_lambda, "excitation wavelength, nm (default: first present chemical's)");
    generate->add_option("--incident", gen.incident, "incident intensity I_o");
    add_noise_options(generate, gen.noise);
    auto* gen_stray_opt =
        generate->add_option("--stray-fraction", gen_stray, "stray light fraction (absorbance only)");
    auto* gen_shift_opt =
        generate->add_option("--shift-nm", gen_shift, "wavelength shift, multiple of the grid step");
    generate->add_option("--from-run", gen_from, "rerun from a run.json (overrides other options)");

    auto* validate =
        app.add_subcommand("validate", "run perturbation studies and guideline checks");
    validate->add_option("--bundle", val.bundle, "chemical bundle directory");
    validate->add_option("--out", val_out, "output report directory")->required();
    auto* val_seed_opt = validate->add_option("--seed", val_seed, "RNG seed (required)");
    validate->add_option("--n-samples", val.n_samples, "samples per study");
    validate->add_option("--eta-sweep", val_sweep, "comma-separated eta list (one study per value)");
    validate->add_option("--concentration", val.concentration,
                         "molar concentration per present chemical");
    validate->add_option("--bins", val.bins, "histogram bin count");
    validate->add_option("--mean-gate", val.mean_gate, "absolute mean threshold for g4/g5");
    validate->add_option("--skew-gate", val.skew_gate, "absolute skewness threshold for g4/g5");
    add_noise_options(validate, val.noise);
    validate->add_option("--from-run", val_from, "rerun from a run.json (overrides other options)");

    auto* tune =
        app.add_subcommand("tune-p", "solve for the p that balances expected window intensity");
    double tune_target = 1.0;
    std::size_t tune_real = 100000;
    std::uint64_t tune_seed = 0;
    NoiseConfig tune_nc;
    add_noise_options(tune, tune_nc);
    tune->add_option("--seed", tune_seed, "RNG seed for the Monte Carlo arms");
    tune->add_option("--target", tune_target, "target expected window intensity");
    tune->add_option("--realizations", tune_real, "Monte Carlo realizations per arm");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*ingest) return run_ingest(in_manifest, in_out, in_start, in_end);

        if (*generate) {
            GenerateConfig cfg;
            if (!gen_from.empty()) {
                cfg = generate_from_json(load_json_file(gen_from));
            } else {
                cfg = gen;
                if (cfg.bundle.empty())
                    throw std::invalid_argument("--bundle is required (or use --from-run)");
                if (gen_seed_opt->count() == 0)
                    throw std::invalid_argument("--seed is required for generate");
                cfg.noise.params.seed = gen_seed;
                if (gen_k_opt->count() > 0) cfg.k_filter = gen_k;
                if (gen_lambda_opt->count() > 0) cfg.lambda_ex = gen_lambda;
                if (gen_stray_opt->count() > 0) cfg.noise.stray_fraction = gen_stray;
                if (gen_shift_opt->count() > 0) cfg.noise.shift_nm = gen_shift;
            }
            return run_generate(cfg, gen_out);
        }

        if (*validate) {
            ValidateConfig cfg;
            if (!val_from.empty()) {
                cfg = validate_from_json(load_json_file(val_from));
            } else {
                cfg = val;
                if (cfg.bundle.empty())
                    throw std::invalid_argument("--bundle is required (or use --from-run)");
                if (val_seed_opt->count() == 0)
                    throw std::invalid_argument("--seed is required for validate");
                cfg.noise.params.seed = val_seed;
                if (!val_sweep.empty()) {
                    cfg.etas.clear();
                    std::stringstream ss(val_sweep);
                    std::string tok;
                    while (std::getline(ss, tok, ',')) {
                        if (tok.empty())
                            throw std::invalid_argument("--eta-sweep holds an empty entry");
                        std::size_t used = 0;
                        double v = 0.0;
                        try {
                            v = std::stod(tok, &used);
                        } catch (const std::exception&) {
                            used = 0;
                        }
                        if (used != tok.size())
                            throw std::invalid_argument("--eta-sweep entry '" + tok +
                                                        "' is not a number");
                        cfg.etas.push_back(v);
                    }
                } else {
                    cfg.etas = {cfg.noise.params.eta};
                }
                cfg.noise.params.eta = cfg.etas.front();
            }
            return run_validate(cfg, val_out);
        }

        if (*tune) {
            fluorsim::NoiseParams tune_params = tune_nc.params;
            tune_params.seed = tune_seed;
            if (tune_real == 0)
                throw std::invalid_argument("--realizations must be positive");
            return run_tune(tune_params, tune_target, tune_real);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
