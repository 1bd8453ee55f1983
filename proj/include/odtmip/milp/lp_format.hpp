#pragma once

#include <iosfwd>
#include <string>

#include "odtmip/milp/model.hpp"

namespace odtmip::milp {

/// Writes the model in CPLEX LP text format (Minimize / Subject To / Bounds /
/// General / Binary / End). Every coefficient is printed with 17
/// significant digits so the file reproduces the model bit for bit.
void write_lp(std::ostream& out, const Model& model);
std::string to_lp_string(const Model& model);

/// "%.17g" formatting used by every text export in the library.
std::string format_exact(double value);

}  // namespace odtmip::milp
