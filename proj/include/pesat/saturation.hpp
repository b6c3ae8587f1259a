#pragma once

// Saturating chains of exact subspaces under the bracket moves, with a
// derivation tree that lets every accepted generator be recomputed.

#include <string>
#include <vector>

#include <json.hpp>

#include "pesat/field.hpp"
#include "pesat/mode_space.hpp"

namespace pesat {

/// Provable: only moves that are certainly in the lineality space of the
/// velocity cone. Span: adds every self-advection image and cross term.
enum class F1Mode { Provable, Span };

enum class NodeKind { Seed, FrakB2, Q1Image, CrossB1, B1Image, LinBracket, LinearCombo };

const char* to_string(NodeKind kind);

struct DerivationNode {
  NodeKind kind = NodeKind::Seed;
  std::vector<int> children;
  std::vector<Rational> coeffs;  // LinearCombo only
  int seed_index = -1;
  int step = 0;  // chain index at which the node was accepted
  RState value;
};

struct DerivationTree {
  std::vector<RState> seeds;
  std::vector<DerivationNode> nodes;

  int add(DerivationNode node);
  /// Recompute node i from its children's stored values.
  RState evaluate(int i) const;
  /// Every node's stored value matches its recomputation.
  bool verify() const;
  nlohmann::json to_json() const;
};

/// Seed directions as exact states.
struct Subspace {
  std::vector<RState> basis;
};

Subspace seed_H10();
Subspace seed_Htilde();

struct ChainOptions {
  F1Mode mode = F1Mode::Provable;
  // Working modes are capped at (M + extra_m, P + extra_p); candidates
  // reaching beyond the cap are discarded.
  int cap_extra_m = 1;
  int cap_extra_p = 2;
  bool stop_when_full = true;
  bool grow_theta = true;
  bool grow_velocity = true;
};

struct ChainStep {
  int j = 0;
  int dim_theta = 0;
  int dim_v = 0;
  int dim_total = 0;
  int dim_contained = 0;  // dimension of the part lying inside the truncation
};

struct ChainReport {
  Truncation trunc;
  Truncation cap;
  int full_dim = 0;
  std::vector<ChainStep> steps;
  bool reached_full = false;
  int stop_j = -1;
  int witness_count = 0;
  std::vector<int> generators;  // node ids of accepted generators
  DerivationTree tree;
  double seconds = 0.0;

  nlohmann::json to_json(bool with_tree = true) const;
};

/// Nonlinear chain: temperature part grows by brackets of pairs, velocity
/// part by Q1 images and by the moves selected through `mode`.
ChainReport chain(const Subspace& seeds, int max_j, Truncation trunc, ChainOptions opt = {});

/// Linearized chain around the rest state; seeds must be pure temperature.
ChainReport lin_chain(const Subspace& seeds, int max_j, Truncation trunc, ChainOptions opt = {});

/// One bracket step on a temperature span; the result contains the input.
Subspace f2_step(const Subspace& s2, Truncation trunc);

/// One step of the velocity moves; returns the velocity generators.
Subspace f1_step(const Subspace& s, F1Mode mode, Truncation trunc);

/// Exact membership of u in span(s); every vector must fit in `space`.
bool span_contains(const Subspace& s, const RState& u, Truncation space);

Subspace generators(const ChainReport& r);

/// Rank of the truncated projections of the accepted generators in floating
/// point (independent of the exact reduction).
int float_rank(const ChainReport& report, double tol = 1e-9);

}  // namespace pesat
