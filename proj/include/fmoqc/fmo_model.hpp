#pragma once

#include <array>
#include <string>

#include "fmoqc/common.hpp"

namespace fmoqc {

inline constexpr int kNumSites = 7;

// Speed of light in cm/ps; cm^-1 inputs convert to rad/ps via 2*pi*c.
inline constexpr double kSpeedOfLightCmPerPs = 0.0299792458;

// Seven-site excitonic Hamiltonian in internal units (rad/ps).
// Validation rules (each rejection names its rule):
//   "couplings-symmetry":  V must be symmetric (asymmetry > 1e-9 rejected)
//                          with zero diagonal.
//   "site-energy-minimum": E_3 is the strict minimum of the seven energies.
//   "strongest-pairs":     the three largest |V_nm| lie exactly on the pairs
//                          (1,2), (4,5), (5,6), strictly above the fourth.
struct FmoHamiltonian {
    std::array<double, kNumSites> site_energies{};      // rad/ps
    Eigen::Matrix<double, kNumSites, kNumSites> couplings =
        Eigen::Matrix<double, kNumSites, kNumSites>::Zero();  // rad/ps
};

// How the site dephasing rate is specified.
struct DephasingSpec {
    enum class Mode { kDirect, kTemperature };
    Mode mode = Mode::kTemperature;
    double direct_value = 0.0;   // 1/ps, used in kDirect mode
    double t_ref_kelvin = 77.0;  // calibration pair, used in kTemperature mode
    double rate_ref = 0.0;       // 1/ps at t_ref_kelvin
};

// Rates of the three Lindblad channels, all in 1/ps.  Population decay under a
// channel of rate G goes as exp(-2 G t) (the jump operators carry sqrt(2G)).
struct DecoherenceRates {
    double recomb_rate = 0.0;     // every site -> G
    double sink_rate = 0.0;       // site 3 -> S only
    double dephasing_rate = 0.0;  // per-site pure dephasing
};

struct FmoModel {
    FmoHamiltonian hamiltonian;
    double recomb_rate = 0.0;
    double sink_rate = 0.0;
    DephasingSpec dephasing;
};

// Throws ValidationError naming the violated rule (see FmoHamiltonian).
// Symmetrizes the couplings exactly after the asymmetry check passes.
void validate_hamiltonian(FmoHamiltonian& h);

// Loads a model file (JSON: units, site_energies[7], couplings[7][7],
// recomb_rate, sink_rate, dephasing{...}).  Energies/couplings convert from
// the declared units ("cm-1" or "rad/ps") to rad/ps; rates are 1/ps as given.
FmoModel load_model(const std::string& path);
FmoModel load_model_from_string(const std::string& text);

// Linear law gamma(T) = rate_ref * T / T_ref; inputs must be positive.
double dephasing_rate_from_temperature(double t_kelvin, double t_ref_kelvin,
                                       double rate_ref);

// Resolves the model's dephasing spec at the given temperature.
DecoherenceRates rates_at_temperature(const FmoModel& model, double t_kelvin);

}  // namespace fmoqc
