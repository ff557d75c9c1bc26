#include "fmoqc/fmo_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <tuple>
#include <vector>

#include <json.hpp>

namespace fmoqc {

namespace {

constexpr double kSymmetryTol = 1e-9;

using Json = nlohmann::json;

double unit_factor(const std::string& units) {
    if (units == "cm-1") return 2.0 * std::numbers::pi * kSpeedOfLightCmPerPs;
    if (units == "rad/ps") return 1.0;
    throw ValidationError("load_model: unknown units '" + units +
                          "' (expected cm-1 or rad/ps)");
}

}  // namespace

void validate_hamiltonian(FmoHamiltonian& h) {
    auto& v = h.couplings;
    for (int m = 0; m < kNumSites; ++m) {
        if (std::abs(v(m, m)) > kSymmetryTol) {
            throw ValidationError("Hamiltonian rule couplings-symmetry: nonzero diagonal at site " +
                                  std::to_string(m + 1));
        }
        v(m, m) = 0.0;
        for (int n = m + 1; n < kNumSites; ++n) {
            if (std::abs(v(m, n) - v(n, m)) > kSymmetryTol) {
                std::ostringstream os;
                os << "Hamiltonian rule couplings-symmetry: V(" << m + 1 << "," << n + 1
                   << ") and its transpose differ by " << std::abs(v(m, n) - v(n, m));
                throw ValidationError(os.str());
            }
            const double sym = 0.5 * (v(m, n) + v(n, m));
            v(m, n) = sym;
            v(n, m) = sym;
        }
    }

    const double e3 = h.site_energies[2];
    for (int m = 0; m < kNumSites; ++m) {
        if (m == 2) continue;
        if (!(e3 < h.site_energies[m])) {
            throw ValidationError(
                "Hamiltonian rule site-energy-minimum: E_3 is not the strict minimum "
                "(site " + std::to_string(m + 1) + " is not above it)");
        }
    }

    // Rank all off-diagonal pairs by |V| and require the top three to be the
    // expected pairs, strictly separated from the fourth.
    std::vector<std::tuple<double, int, int>> ranked;
    for (int m = 0; m < kNumSites; ++m) {
        for (int n = m + 1; n < kNumSites; ++n) {
            ranked.emplace_back(std::abs(v(m, n)), m + 1, n + 1);
        }
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
    auto pair_of = [](const std::tuple<double, int, int>& t) {
        return std::make_pair(std::get<1>(t), std::get<2>(t));
    };
    std::vector<std::pair<int, int>> top = {pair_of(ranked[0]), pair_of(ranked[1]),
                                            pair_of(ranked[2])};
    std::sort(top.begin(), top.end());
    const std::vector<std::pair<int, int>> expected = {{1, 2}, {4, 5}, {5, 6}};
    if (top != expected) {
        std::ostringstream os;
        os << "Hamiltonian rule strongest-pairs: three largest |V| on pairs";
        for (const auto& [a, b] : top) os << " (" << a << "," << b << ")";
        os << ", expected (1,2) (4,5) (5,6)";
        throw ValidationError(os.str());
    }
    if (!(std::get<0>(ranked[2]) > std::get<0>(ranked[3]))) {
        throw ValidationError(
            "Hamiltonian rule strongest-pairs: third-largest |V| not strictly above the fourth");
    }
}

FmoModel load_model_from_string(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ValidationError(std::string("load_model: parse error: ") + e.what());
    }

    auto require = [&j](const char* key) -> const Json& {
        if (!j.contains(key)) {
            throw ValidationError(std::string("load_model: missing field '") + key + "'");
        }
        return j.at(key);
    };

    FmoModel model;
    const double factor = unit_factor(require("units").get<std::string>());

    const auto& energies = require("site_energies");
    if (!energies.is_array() || energies.size() != kNumSites) {
        throw ValidationError("load_model: site_energies must have 7 entries");
    }
    for (int m = 0; m < kNumSites; ++m) {
        model.hamiltonian.site_energies[m] = energies[m].get<double>() * factor;
    }

    const auto& couplings = require("couplings");
    if (!couplings.is_array() || couplings.size() != kNumSites) {
        throw ValidationError("load_model: couplings must be a 7x7 matrix");
    }
    for (int m = 0; m < kNumSites; ++m) {
        const auto& row = couplings[m];
        if (!row.is_array() || row.size() != kNumSites) {
            throw ValidationError("load_model: couplings must be a 7x7 matrix");
        }
        for (int n = 0; n < kNumSites; ++n) {
            model.hamiltonian.couplings(m, n) = row[n].get<double>() * factor;
        }
    }

    model.recomb_rate = require("recomb_rate").get<double>();
    model.sink_rate = require("sink_rate").get<double>();
    if (model.recomb_rate < 0 || model.sink_rate < 0) {
        throw ValidationError("load_model: decoherence rates must be non-negative");
    }

    const auto& deph = require("dephasing");
    if (!deph.contains("mode")) {
        throw ValidationError("load_model: dephasing.mode missing");
    }
    const std::string mode = deph.at("mode").get<std::string>();
    if (mode == "direct") {
        model.dephasing.mode = DephasingSpec::Mode::kDirect;
        if (!deph.contains("value")) {
            throw ValidationError("load_model: dephasing.value missing for direct mode");
        }
        model.dephasing.direct_value = deph.at("value").get<double>();
        if (model.dephasing.direct_value < 0) {
            throw ValidationError("load_model: dephasing.value must be non-negative");
        }
    } else if (mode == "temperature") {
        model.dephasing.mode = DephasingSpec::Mode::kTemperature;
        if (!deph.contains("calibration")) {
            throw ValidationError("load_model: dephasing.calibration missing for temperature mode");
        }
        const auto& cal = deph.at("calibration");
        if (!cal.contains("t_ref_kelvin") || !cal.contains("rate_ref")) {
            throw ValidationError(
                "load_model: dephasing.calibration needs t_ref_kelvin and rate_ref");
        }
        model.dephasing.t_ref_kelvin = cal.at("t_ref_kelvin").get<double>();
        model.dephasing.rate_ref = cal.at("rate_ref").get<double>();
        if (model.dephasing.t_ref_kelvin <= 0 || model.dephasing.rate_ref <= 0) {
            throw ValidationError("load_model: dephasing calibration pair must be positive");
        }
    } else {
        throw ValidationError("load_model: dephasing.mode must be direct or temperature");
    }

    validate_hamiltonian(model.hamiltonian);
    return model;
}

FmoModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("load_model: cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_model_from_string(buffer.str());
}

double dephasing_rate_from_temperature(double t_kelvin, double t_ref_kelvin, double rate_ref) {
    if (t_kelvin <= 0 || t_ref_kelvin <= 0 || rate_ref <= 0) {
        throw ValidationError("dephasing_rate_from_temperature: inputs must be strictly positive");
    }
    return rate_ref * t_kelvin / t_ref_kelvin;
}

DecoherenceRates rates_at_temperature(const FmoModel& model, double t_kelvin) {
    DecoherenceRates rates;
    rates.recomb_rate = model.recomb_rate;
    rates.sink_rate = model.sink_rate;
    if (model.dephasing.mode == DephasingSpec::Mode::kDirect) {
        rates.dephasing_rate = model.dephasing.direct_value;
    } else {
        rates.dephasing_rate = dephasing_rate_from_temperature(
            t_kelvin, model.dephasing.t_ref_kelvin, model.dephasing.rate_ref);
    }
    return rates;
}

}  // namespace fmoqc
