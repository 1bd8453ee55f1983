#include "odtmip/cuts.hpp"

#include <random>
#include <string>

namespace odtmip {
namespace {

using milp::Constraint;
using milp::ConstraintTag;
using milp::Sense;
using milp::Term;

Constraint cut(std::string name, std::vector<Term> terms, double rhs) {
  return Constraint{std::move(name), std::move(terms), Sense::GreaterEqual, rhs,
                    ConstraintTag::UserCut};
}

}  // namespace

std::vector<Constraint> pigeonhole_cuts(const ClassPartition& partition,
                                        const VariableIndexMap& map,
                                        const CutFamilyConfig& config) {
  std::vector<Constraint> out;
  std::vector<std::size_t> nonempty;
  for (std::size_t k = 0; k < partition.members.size(); ++k) {
    if (!partition.members[k].empty()) nonempty.push_back(k);
  }
  const std::size_t cap =
      config.cap == std::numeric_limits<std::size_t>::max() ? 5 * map.n : config.cap;
  const std::size_t first = map.first_leaf();
  const std::size_t leaves = first;
  const std::size_t reps = nonempty.size();
  const bool singles = 1 < reps;
  const bool all_but_one = leaves - 1 < reps && leaves > 2;
  if (cap == 0 || (!singles && !all_but_one)) return out;

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> chosen(reps);
  const auto sample = [&] {
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& members = partition.members[nonempty[r]];
      std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
      chosen[r] = members[pick(rng)];
    }
  };
  for (std::size_t round = 0; out.size() < cap && round < cap; ++round) {
    for (std::size_t l = first; l < 2 * first && out.size() < cap; ++l) {
      for (int variant = 0; variant < 2 && out.size() < cap; ++variant) {
        if ((variant == 0 && !singles) || (variant == 1 && !all_but_one)) continue;
        sample();
        std::vector<Term> terms;
        for (const std::size_t i : chosen) {
          terms.push_back({map.c[i], 1.0});
          for (std::size_t k = first; k < 2 * first; ++k) {
            if ((k == l) == (variant == 0)) terms.push_back({map.e_(i, k), -1.0});
          }
        }
        const double size = variant == 0 ? 1.0 : static_cast<double>(leaves - 1);
        out.push_back(cut("pigeon[" + std::to_string(out.size()) + "]", std::move(terms), -size));
      }
    }
  }
  return out;
}

std::vector<Constraint> class_size_cuts(const ClassPartition& partition,
                                        const VariableIndexMap& map,
                                        const CutFamilyConfig& config) {
  std::vector<Constraint> out;
  const auto& s = partition.sorted_sizes;
  if (s.empty()) return out;
  const std::size_t first = map.first_leaf();
  const std::size_t leaves = first;
  const std::size_t Y = s.size();
  std::vector<Term> all_c;
  for (const auto c : map.c) all_c.push_back({c, 1.0});

  if (config.leaf_capacity) {
    for (std::size_t l = first; l < 2 * first; ++l) {
      auto terms = all_c;
      for (std::size_t i = 0; i < map.n; ++i) terms.push_back({map.e_(i, l), -1.0});
      out.push_back(cut("leaf_capacity[" + std::to_string(l) + "]", std::move(terms),
                        -static_cast<double>(s.back())));
    }
  }
  if (config.leaf_coverage && Y >= leaves) {
    const double rhs = static_cast<double>(s.front()) * static_cast<double>(Y - leaves + 1);
    for (std::size_t l = first; l < 2 * first; ++l) {
      auto terms = all_c;
      for (std::size_t i = 0; i < map.n; ++i) terms.push_back({map.e_(i, l), 1.0});
      out.push_back(cut("leaf_coverage[" + std::to_string(l) + "]", std::move(terms), rhs));
    }
  }
  if (config.class_overflow && Y > leaves) {
    double rhs = 0.0;
    for (std::size_t k = 0; k < Y - leaves; ++k) rhs += static_cast<double>(s[k]);
    out.push_back(cut("class_overflow", all_c, rhs));
  }
  return out;
}

std::size_t add_cuts(milp::Model& model, const VariableIndexMap& map, const Dataset& data,
                     const CutFamilyConfig& config) {
  const auto partition = class_partition(data);
  std::size_t added = 0;
  if (config.pigeonhole) {
    for (auto& c : pigeonhole_cuts(partition, map, config)) {
      model.add_constraint(std::move(c));
      ++added;
    }
  }
  for (auto& c : class_size_cuts(partition, map, config)) {
    model.add_constraint(std::move(c));
    ++added;
  }
  return added;
}

std::vector<std::size_t> verify_cuts_against(const ObliqueTree& tree, const Dataset& data,
                                             const VariableIndexMap& map,
                                             std::size_t num_variables,
                                             const std::vector<Constraint>& cuts) {
  const auto values = embed_warm_start(tree, data, map, num_variables);
  std::vector<std::size_t> violated;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    if (milp::row_violation(cuts[k], values) > 1e-9) violated.push_back(k);
  }
  return violated;
}

}  // namespace odtmip
