#include "fluorsim/validation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace fluorsim {

SummaryStats summarize(const std::vector<double>& data) {
    SummaryStats s;
    s.count = data.size();
    if (data.empty()) return s;
    const double n = static_cast<double>(data.size());

    double mean = 0.0;
    std::size_t pos = 0;
    for (double x : data) {
        mean += x;
        if (x > 0.0) ++pos;
    }
    mean /= n;

    double m2 = 0.0, m3 = 0.0;
    for (double x : data) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;

    s.mean = mean;
    s.stddev = std::sqrt(m2);
    s.skewness = m2 > 1e-300 ? m3 / std::pow(m2, 1.5) : 0.0;
    s.fraction_positive = static_cast<double>(pos) / n;
    return s;
}

std::vector<double> element_deltas(const Spectrum& s, const std::vector<double>& multiplier) {
    if (s.values.size() != multiplier.size())
        throw std::invalid_argument("element_deltas: length mismatch");
    double mx = 0.0;
    for (double v : s.values) mx = std::max(mx, v);
    if (!(mx > 0.0)) throw std::invalid_argument("element_deltas: null spectrum");
    std::vector<double> out(s.values.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = (multiplier[k] - 1.0) * (s.values[k] / mx);
    return out;
}

double vector_delta(const Spectrum& s, const std::vector<double>& multiplier) {
    if (s.values.size() != multiplier.size())
        throw std::invalid_argument("vector_delta: length mismatch");
    double sum = 0.0;
    for (double v : s.values) sum += v;
    if (!(sum > 0.0)) throw std::invalid_argument("vector_delta: null spectrum");
    double acc = 0.0;
    for (std::size_t k = 0; k < s.values.size(); ++k)
        acc += (multiplier[k] - 1.0) * (s.values[k] / sum);
    return acc;
}

IntensityStudy run_study(const std::vector<ChemicalRecord>& db, NoiseModel model,
                         const NoiseParams& params, std::size_t n_samples,
                         const Rng& rng, double concentration) {
    if (db.empty()) throw std::invalid_argument("run_study: empty database");
    if (n_samples < 1) throw std::invalid_argument("run_study: need at least one sample");
    validate_params(params);

    const std::size_t n = db.size();
    const auto n_codes = static_cast<double>((std::uint64_t(1) << n) - 1);

    IntensityStudy study;
    study.model = model;
    study.params = params;
    study.n_samples = n_samples;
    study.delta_vector.reserve(n_samples);

    for (std::size_t i = 0; i < n_samples; ++i) {
        const Rng sample = rng.fork(i);
        const Rng code_rng = sample.fork(0);
        const Rng noise_rng = sample.fork(1);

        const auto pick = static_cast<std::uint64_t>(code_rng.uniform_at(0) * n_codes);
        MixtureSpec mix;
        mix.code = static_cast<std::uint32_t>(1 + std::min<std::uint64_t>(
                                                      pick, static_cast<std::uint64_t>(n_codes) - 1));
        mix.concentrations.assign(static_cast<std::size_t>(std::popcount(mix.code)),
                                  concentration);

        try {
            const Spectrum abs = synthesize_absorption(db, mix);
            const WindowPlan plan = build_plan(abs, params.window_len, params.alpha);
            std::vector<double> mult;
            switch (model) {
                case NoiseModel::Dilate: mult = dilation_multiplier(plan, params.eta); break;
                case NoiseModel::Compress: mult = compression_multiplier(plan, params.eta); break;
                case NoiseModel::Failure: mult = failure_multiplier(plan, params.eta, noise_rng); break;
                case NoiseModel::Optimized: mult = optimized_multiplier(plan, params, noise_rng); break;
            }
            auto de = element_deltas(abs, mult);
            study.delta_element.insert(study.delta_element.end(), de.begin(), de.end());
            study.delta_vector.push_back(vector_delta(abs, mult));
        } catch (const std::exception& ex) {
            throw std::runtime_error("sample " + std::to_string(i) + ": " + ex.what());
        }
    }

    study.summary_element = summarize(study.delta_element);
    std::vector<double> nonzero;
    nonzero.reserve(study.delta_element.size());
    for (double d : study.delta_element)
        if (d != 0.0) nonzero.push_back(d);
    study.summary_element_nonzero = summarize(nonzero);
    study.summary_vector = summarize(study.delta_vector);
    return study;
}

HistogramReport histogram(const std::vector<double>& data, std::size_t n_bins,
                          double low, double high) {
    if (n_bins < 1) throw std::invalid_argument("histogram: need at least one bin");
    if (!(low < high)) throw std::invalid_argument("histogram: empty range");
    HistogramReport rep;
    rep.low = low;
    rep.high = high;
    rep.counts.assign(n_bins, 0);
    rep.total = data.size();
    for (double x : data) {
        if (x < low) {
            ++rep.underflow;
        } else if (x > high) {
            ++rep.overflow;
        } else {
            auto bin = static_cast<std::size_t>((x - low) / (high - low) *
                                                static_cast<double>(n_bins));
            if (bin >= n_bins) bin = n_bins - 1;  // x == high joins the last bin
            ++rep.counts[bin];
        }
    }
    return rep;
}

std::string guideline_status_name(GuidelineStatus s) {
    switch (s) {
        case GuidelineStatus::Pass: return "pass";
        case GuidelineStatus::Fail: return "fail";
        case GuidelineStatus::NotEvaluated: return "not_evaluated";
    }
    return "unknown";
}

GuidelineReport guideline_report(const std::vector<IntensityStudy>& studies,
                                 double mean_gate, double skew_gate) {
    if (studies.empty())
        throw std::invalid_argument("guideline_report: no studies");
    GuidelineReport rep;

    // G1: the model must draw fresh randomness for each designed window.
    bool structural = true;
    for (const auto& st : studies)
        structural = structural && (st.model == NoiseModel::Failure ||
                                    st.model == NoiseModel::Optimized);
    rep.g1 = structural ? GuidelineStatus::Pass : GuidelineStatus::Fail;

    // G2: both displacement signs somewhere in each noisy vector collection.
    bool any_noisy = false, signs_ok = true;
    for (const auto& st : studies) {
        if (st.params.eta == 0.0) continue;
        any_noisy = true;
        bool pos = false, neg = false;
        for (double d : st.delta_element) {
            pos = pos || d > 0.0;
            neg = neg || d < 0.0;
            if (pos && neg) break;
        }
        signs_ok = signs_ok && pos && neg;
    }
    rep.g2 = !any_noisy ? GuidelineStatus::NotEvaluated
                        : (signs_ok ? GuidelineStatus::Pass : GuidelineStatus::Fail);

    // G3: spread strictly grows across an eta sweep.
    std::vector<std::pair<double, double>> spread;  // (eta, std of element deltas)
    for (const auto& st : studies)
        spread.emplace_back(st.params.eta, st.summary_element.stddev);
    std::sort(spread.begin(), spread.end());
    spread.erase(std::unique(spread.begin(), spread.end(),
                             [](const auto& a, const auto& b) { return a.first == b.first; }),
                 spread.end());
    if (spread.size() < 2) {
        rep.g3 = GuidelineStatus::NotEvaluated;
    } else {
        bool growing = true;
        for (std::size_t i = 1; i < spread.size(); ++i)
            growing = growing && spread[i].second > spread[i - 1].second;
        rep.g3 = growing ? GuidelineStatus::Pass : GuidelineStatus::Fail;
    }

    // G4/G5: symmetry gates. All-zero collections pass trivially.
    auto gate = [&](const SummaryStats& s) {
        if (s.count == 0) return GuidelineStatus::Pass;
        return std::abs(s.mean) <= mean_gate && std::abs(s.skewness) <= skew_gate
                   ? GuidelineStatus::Pass
                   : GuidelineStatus::Fail;
    };
    rep.g4 = GuidelineStatus::Pass;
    rep.g5 = GuidelineStatus::Pass;
    for (const auto& st : studies) {
        if (gate(st.summary_element_nonzero) == GuidelineStatus::Fail)
            rep.g4 = GuidelineStatus::Fail;
        if (gate(st.summary_vector) == GuidelineStatus::Fail)
            rep.g5 = GuidelineStatus::Fail;
    }
    return rep;
}

}  // namespace fluorsim
