#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "odtmip/dataset.hpp"
#include "odtmip/formulation.hpp"
#include "odtmip/milp/model.hpp"
#include "odtmip/tree.hpp"

namespace odtmip {

struct CutFamilyConfig {
  bool pigeonhole = true;
  bool leaf_capacity = true;   ///< sum c >= sum_i e_il - s_Y, per leaf
  bool leaf_coverage = true;   ///< sum (c + e_il) >= s_1 (Y - 2^D + 1), per leaf
  bool class_overflow = true;  ///< sum c >= s_1 + ... + s_(Y - 2^D)
  /// Pigeonhole cuts emitted at most; the default means 5 n.
  std::size_t cap = std::numeric_limits<std::size_t>::max();
  std::uint64_t seed = 0;
};

/// Cuts sum_{i in I} c_i >= sum_{i in I, l in L} e_il - |L| where I holds
/// one random member of each class and L is a single leaf or all leaves
/// but one. Vacuous cuts (|L| >= |I|) are skipped.
std::vector<milp::Constraint> pigeonhole_cuts(const ClassPartition& partition,
                                              const VariableIndexMap& map,
                                              const CutFamilyConfig& config);

/// The three class-size families, each gated on Y versus 2^D.
std::vector<milp::Constraint> class_size_cuts(const ClassPartition& partition,
                                              const VariableIndexMap& map,
                                              const CutFamilyConfig& config = {});

/// Appends every enabled family as user cuts; returns how many were added.
std::size_t add_cuts(milp::Model& model, const VariableIndexMap& map, const Dataset& data,
                     const CutFamilyConfig& config);

/// Indices of the cuts violated (beyond 1e-9) by the embedding of `tree`.
std::vector<std::size_t> verify_cuts_against(const ObliqueTree& tree, const Dataset& data,
                                             const VariableIndexMap& map,
                                             std::size_t num_variables,
                                             const std::vector<milp::Constraint>& cuts);

}  // namespace odtmip
