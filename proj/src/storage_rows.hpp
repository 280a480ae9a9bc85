#pragma once

// Storage variables and level rows shared by the dispatch program and the
// rights feasibility test.
//
// For node i and period t the level is
//   z_t = z0 + Y_t + Σ_{τ≤t} Σ_{j∈Ω} q_j(u_{j,τ−lag}) − Σ_{τ≤t} q_i(u_{i,τ})
// with q convex. Each bound is kept convex by replacing the concave part
// with its linear term b·u:
//   upper row  Σ q_j(u_j) − Σ b_i u_i ≤ ẑ_t − E_t − z0 − Y_t
//   lower row  Σ q_i(u_i) − Σ b_j u_j ≤ z0 + Y_t − ž_t
// The linear term never exceeds q on u ≥ 0, so both rows are conservative
// for the true trajectory; with a = 0 (batteries, linear plants) they are
// exact.

#include "dispatch.hpp"
#include "program_builder.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hydrofsr::detail {

struct StorageBlock {
  std::vector<std::vector<Eigen::Index>> power;       // [storage][t]
  std::vector<std::vector<Eigen::Index>> upper_rows;  // inequality indices
  std::vector<std::vector<Eigen::Index>> lower_rows;
};

// `headroom` (optional) holds E per storage unit, length T each.
StorageBlock add_storage_block(ProgramBuilder& builder, const MpedCase& c,
                               const std::vector<Eigen::VectorXd>* headroom = nullptr);

}  // namespace hydrofsr::detail
