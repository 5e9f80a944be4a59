#pragma once

// DC operating point of generated circuits: wire contraction plus nodal
// analysis with batteries as Norton equivalents.

#include <cstddef>
#include <vector>

#include "wavegraph/taskgen.hpp"

namespace wavegraph {

struct ContractedCircuit {
  /// Supernode of every original node.
  std::vector<std::size_t> supernode;
  std::size_t supernode_count = 0;
  std::size_t ground = 0;
  /// Dense row-major conductance matrix over supernodes (siemens).
  std::vector<double> conductance;
  /// Current injected into each supernode (amperes).
  std::vector<double> injection;

  double g(std::size_t i, std::size_t j) const { return conductance[i * supernode_count + j]; }
};

/// Merges wire-connected nodes; conductance and injection are left empty.
ContractedCircuit contract_wires(const CircuitNetlist& net);

/// Contraction plus resistor and Norton battery stamps.
ContractedCircuit stamp_circuit(const CircuitNetlist& net);

/// Supernode voltages of a stamped circuit, ground at 0. Throws NumericError
/// naming the first supernode without a conductive path to ground.
std::vector<double> solve_supernodes(const ContractedCircuit& c);

/// Node voltages relative to ground.
std::vector<double> solve_dc(const CircuitNetlist& net);

/// Largest absolute net current leaving any non-ground supernode.
double kcl_residual(const CircuitNetlist& net, const std::vector<double>& voltages);

}  // namespace wavegraph
