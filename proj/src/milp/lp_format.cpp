#include "odtmip/milp/lp_format.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <unordered_set>
#include <vector>

namespace odtmip::milp {
namespace {

bool allowed(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_' || c == '.' || c == '(' || c == ')' || c == '[' || c == ']' || c == ',';
}

// LP names may not start with a digit or a period and must be unique.
std::vector<std::string> make_names(std::size_t count, char prefix,
                                    auto&& raw_name) {
  std::vector<std::string> names(count);
  std::unordered_set<std::string> used;
  for (std::size_t i = 0; i < count; ++i) {
    std::string name;
    for (const char c : raw_name(i)) name += allowed(c) ? c : '_';
    if (name.empty() || (name[0] >= '0' && name[0] <= '9') || name[0] == '.') {
      name = std::string(1, prefix) + std::to_string(i) + (name.empty() ? "" : "_" + name);
    }
    if (!used.insert(name).second) {
      name += "#" + std::to_string(i);
      used.insert(name);
    }
    names[i] = std::move(name);
  }
  return names;
}

void write_terms(std::ostream& out, const std::vector<Term>& terms,
                 const std::vector<std::string>& names) {
  if (terms.empty()) {
    out << " 0 " << names.front();
    return;
  }
  for (const auto& t : terms) {
    out << (t.coef < 0 ? " - " : " + ") << format_exact(std::abs(t.coef)) << ' '
        << names[t.var.pos()];
  }
}

}  // namespace

std::string format_exact(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_lp(std::ostream& out, const Model& model) {
  const auto& vars = model.variables();
  const auto& rows = model.constraints();
  const auto var_names =
      make_names(vars.size(), 'x', [&](std::size_t i) -> const std::string& { return vars[i].name; });
  const auto row_names =
      make_names(rows.size(), 'r', [&](std::size_t i) -> const std::string& { return rows[i].name; });

  out << "\\ odtmip model: " << vars.size() << " variables, " << rows.size()
      << " constraints\n";
  out << "Minimize\n obj:";
  std::vector<Term> objective;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (vars[j].objective != 0.0) {
      objective.push_back({VarId{static_cast<std::int32_t>(j)}, vars[j].objective});
    }
  }
  if (!vars.empty()) write_terms(out, objective, var_names);
  if (model.objective_offset() != 0.0) {
    out << (model.objective_offset() < 0 ? " - " : " + ")
        << format_exact(std::abs(model.objective_offset()));
  }
  out << "\nSubject To\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << ' ' << row_names[r] << ':';
    write_terms(out, rows[r].terms, var_names);
    switch (rows[r].sense) {
      case Sense::LessEqual: out << " <= "; break;
      case Sense::Equal: out << " = "; break;
      case Sense::GreaterEqual: out << " >= "; break;
    }
    out << format_exact(rows[r].rhs) << '\n';
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const auto& v = vars[j];
    if (v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0) continue;
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << ' ' << var_names[j] << " free\n";
    } else {
      out << ' ' << format_exact(v.lower) << " <= " << var_names[j] << " <= "
          << (std::isinf(v.upper) ? std::string("+inf") : format_exact(v.upper)) << '\n';
    }
  }
  bool header = false;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (vars[j].kind != VarKind::Integer) continue;
    if (!header) out << "General\n";
    header = true;
    out << ' ' << var_names[j] << '\n';
  }
  header = false;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (vars[j].kind != VarKind::Binary) continue;
    if (!header) out << "Binary\n";
    header = true;
    out << ' ' << var_names[j] << '\n';
  }
  out << "End\n";
}

std::string to_lp_string(const Model& model) {
  std::ostringstream out;
  write_lp(out, model);
  return out.str();
}

}  // namespace odtmip::milp
