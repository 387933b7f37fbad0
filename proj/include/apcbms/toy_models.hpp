#pragma once

#include <map>
#include <string>

#include "apcbms/observations.hpp"
#include "apcbms/types.hpp"

namespace apcbms::toys {

// Analytical stand-ins for the three competing calcite-precipitation
// simulators. All three predict two quantities on a (space [m], time [h])
// grid parsed from the coordinate labels:
//   calcite_content       [% of pore volume], saturating accumulation with
//                         an exponential depth profile
//   calcium_concentration [mol/m^3], pulse-decay curves after an injection
//
// toy-fc: full kinetics; attachment coefficients grow the biofilm during
//         the experiment, speeding up the reaction over time.
// toy-ib: pre-established biofilm; identical to toy-fc with the ongoing
//         attachment switched off, so the two agree in the low-attachment
//         regime. Consumes only rho_f and k_ub.
// toy-sc: instantaneous conversion; weak parameter dependence and hence
//         the least predictive variance of the set.
Vector toy_fc(const std::map<std::string, double>& params, const OutputGrid& grid);
Vector toy_ib(const std::map<std::string, double>& params, const OutputGrid& grid);
Vector toy_sc(const std::map<std::string, double>& params, const OutputGrid& grid);

inline constexpr const char* kQuantityCalcite = "calcite_content";
inline constexpr const char* kQuantityCalcium = "calcium_concentration";

}  // namespace apcbms::toys
