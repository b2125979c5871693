#pragma once

#include <cstdint>
#include <string>

#include "fluorsim/rng.hpp"
#include "fluorsim/spectrum.hpp"
#include "fluorsim/windowing.hpp"

namespace fluorsim {

enum class NoiseModel { Dilate, Compress, Failure, Optimized };

NoiseModel parse_noise_model(const std::string& name);
std::string noise_model_name(NoiseModel m);

struct NoiseParams {
    double eta = 0.1;    // [0, 1]
    double alpha = 1.0;  // Tukey shape, [0, 1]
    std::size_t window_len = 100;
    double p = 0.5;  // compression probability, [0, 1]
    double a_c1 = 0.5;
    double a_c2 = 0.5;
    double a_c3 = 0.5;
    double a_d1 = 0.5;
    std::uint64_t seed = 0;
};

// Throws std::invalid_argument on out-of-range eta/alpha/p or negative
// coefficients. Constraint A-C violations are NOT errors; see check_constraints.
void validate_params(const NoiseParams& params);

// Multiplier vectors (length plan.total_len, strictly positive). The noisy
// spectrum is multiplier .* values.
//
// Random draws are counter-addressed per designed segment so results do not
// depend on evaluation order: the failure model reads X for segment i at
// counter i-1; the optimized model reads (I, X1, X2, X3) for segment i at
// counters 4*(i-1)+0..3. One draw per segment per variable, never per element.
std::vector<double> dilation_multiplier(const WindowPlan& plan, double eta);
std::vector<double> compression_multiplier(const WindowPlan& plan, double eta);
std::vector<double> failure_multiplier(const WindowPlan& plan, double eta, const Rng& rng);
std::vector<double> optimized_multiplier(const WindowPlan& plan, const NoiseParams& params,
                                         const Rng& rng);

Spectrum apply_multiplier(const Spectrum& s, const std::vector<double>& multiplier);

// Spec'd entry points: build nothing, just compose the pieces above.
Spectrum dilation_noise(const Spectrum& s, const WindowPlan& plan, double eta);
Spectrum compression_noise(const Spectrum& s, const WindowPlan& plan, double eta);
Spectrum failure_noise(const Spectrum& s, const WindowPlan& plan, double eta, const Rng& rng);
Spectrum optimized_noise(const Spectrum& s, const WindowPlan& plan,
                         const NoiseParams& params, const Rng& rng);

struct ConstraintReport {
    struct Item {
        bool pass = false;
        double residual = 0.0;
    };
    Item balance;    // 2*A_c2 - A_c3 == A_d1
    Item variance;   // A_c3^2 == A_d1^2
    Item dominance;  // A_c1 - A_c2 + A_c3 <= A_d1
    bool all_pass() const { return balance.pass && variance.pass && dominance.pass; }
};

ConstraintReport check_constraints(const NoiseParams& params);

// Mean multiplier of the three-window arrangements under the Bernoulli mix:
//   dilation arm    [ones | W_D | ones]
//   compression arm [rising-taper flank | W_C | falling-taper flank],
// flanks affinely blended toward the middle window's adjacent edge elements.
// e_win = p * compression_mean + (1-p) * dilation_mean, estimated over
// `realizations` Monte-Carlo draws (the arrangement mean is linear in the
// draws, so each realization reduces to scalar arithmetic).
struct EwinReport {
    double e_win = 1.0;
    double compression_mean = 1.0;
    double dilation_mean = 1.0;
    std::size_t realizations = 0;
};

EwinReport expected_window_intensity(const NoiseParams& params,
                                     std::size_t realizations = 100000);

struct TuneResult {
    double p = 0.5;
    double e_win = 1.0;
    bool reachable = true;
};

// Bisection on the (monotone decreasing) p -> E_win map; stops at
// |E_win - target| <= 1e-3 or a p-interval <= 1e-4. Both arm means are
// estimated once from the params seed, making the map deterministic and
// exactly linear during the search. eta = 0 returns p = 0.5 by convention.
TuneResult optimize_p(const NoiseParams& params, double target = 1.0,
                      std::size_t realizations = 100000);

// A -> -log10((10^-A + s_f) / (1 + s_f)); deflates absorbance toward 0.
Spectrum stray_light(const Spectrum& s, double stray_fraction);

// Rigid shift by delta nm (a whole number of grid samples); vacated
// positions take the padding floor.
Spectrum wavelength_shift(const Spectrum& s, double delta_nm);

}  // namespace fluorsim
