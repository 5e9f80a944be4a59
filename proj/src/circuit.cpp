#include "wavegraph/circuit.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <numeric>
#include <string>

#include "wavegraph/error.hpp"

namespace wavegraph {

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

ContractedCircuit contract_wires(const CircuitNetlist& net) {
  net.validate();
  DisjointSets sets(net.node_count);
  for (const auto& c : net.components) {
    if (c.kind == ComponentKind::wire) sets.unite(c.a, c.b);
  }
  // Supernodes are numbered by their lowest member node.
  ContractedCircuit out;
  std::vector<std::size_t> index(net.node_count, static_cast<std::size_t>(-1));
  out.supernode.resize(net.node_count);
  for (NodeId u = 0; u < net.node_count; ++u) {
    const std::size_t root = sets.find(u);
    if (index[root] == static_cast<std::size_t>(-1)) index[root] = out.supernode_count++;
    out.supernode[u] = index[root];
  }
  out.ground = out.supernode[net.ground];
  return out;
}

ContractedCircuit stamp_circuit(const CircuitNetlist& net) {
  ContractedCircuit c = contract_wires(net);
  const std::size_t m = c.supernode_count;
  c.conductance.assign(m * m, 0.0);
  c.injection.assign(m, 0.0);
  for (const auto& comp : net.components) {
    if (comp.kind == ComponentKind::wire) continue;
    const std::size_t a = c.supernode[comp.a], b = c.supernode[comp.b];
    const double gab = 1.0 / comp.resistance;
    if (comp.kind == ComponentKind::battery) {
      const std::size_t pos = c.supernode[comp.positive];
      const std::size_t neg = pos == a ? b : a;
      // A battery shorted by wires still drives no net current into its supernode.
      if (pos != neg) {
        c.injection[pos] += comp.voltage * gab;
        c.injection[neg] -= comp.voltage * gab;
      }
    }
    if (a == b) continue;
    c.conductance[a * m + a] += gab;
    c.conductance[b * m + b] += gab;
    c.conductance[a * m + b] -= gab;
    c.conductance[b * m + a] -= gab;
  }
  return c;
}

namespace {

/// Reduced-system index of every supernode; ground maps to -1.
std::vector<std::ptrdiff_t> reduced_index(const ContractedCircuit& c) {
  std::vector<std::ptrdiff_t> idx(c.supernode_count, -1);
  std::ptrdiff_t k = 0;
  for (std::size_t i = 0; i < c.supernode_count; ++i) {
    if (i != c.ground) idx[i] = k++;
  }
  return idx;
}

/// Throws if some supernode has no conductive path to ground.
void check_grounded(const ContractedCircuit& c) {
  const std::size_t m = c.supernode_count;
  std::vector<bool> seen(m, false);
  std::vector<std::size_t> stack{c.ground};
  seen[c.ground] = true;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < m; ++j) {
      if (!seen[j] && c.g(i, j) != 0.0) {
        seen[j] = true;
        stack.push_back(j);
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!seen[i]) {
      throw NumericError("singular circuit: supernode " + std::to_string(i) +
                         " has no conductive path to ground");
    }
  }
}

}  // namespace

std::vector<double> solve_supernodes(const ContractedCircuit& c) {
  check_grounded(c);
  const std::size_t m = c.supernode_count;
  std::vector<double> super_v(m, 0.0);
  if (m > 1) {
    const auto idx = reduced_index(c);
    const auto r = static_cast<Eigen::Index>(m - 1);
    Eigen::MatrixXd gm(r, r);
    Eigen::VectorXd rhs(r);
    for (std::size_t i = 0; i < m; ++i) {
      if (idx[i] < 0) continue;
      rhs(idx[i]) = c.injection[i];
      for (std::size_t j = 0; j < m; ++j) {
        if (idx[j] >= 0) gm(idx[i], idx[j]) = c.g(i, j);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(gm);
    if (llt.info() != Eigen::Success) throw NumericError("circuit conductance matrix is not positive definite");
    const Eigen::VectorXd v = llt.solve(rhs);
    for (std::size_t i = 0; i < m; ++i) {
      if (idx[i] >= 0) super_v[i] = v(idx[i]);
    }
  }
  return super_v;
}

std::vector<double> solve_dc(const CircuitNetlist& net) {
  const ContractedCircuit c = stamp_circuit(net);
  const auto super_v = solve_supernodes(c);
  std::vector<double> out(net.node_count);
  for (NodeId u = 0; u < net.node_count; ++u) out[u] = super_v[c.supernode[u]];
  for (double v : out) {
    if (!std::isfinite(v)) throw NumericError("non-finite node voltage");
  }
  return out;
}

double kcl_residual(const CircuitNetlist& net, const std::vector<double>& voltages) {
  if (voltages.size() != net.node_count) throw InvalidInput("one voltage per node expected");
  const ContractedCircuit c = contract_wires(net);
  // Current leaving each supernode through resistive branches.
  std::vector<double> leaving(c.supernode_count, 0.0);
  for (const auto& comp : net.components) {
    double current_ab = 0.0;  // from a to b through the component
    const double va = voltages[comp.a], vb = voltages[comp.b];
    if (comp.kind == ComponentKind::wire) continue;
    if (comp.kind == ComponentKind::resistor) {
      current_ab = (va - vb) / comp.resistance;
    } else {
      const NodeId neg = comp.positive == comp.a ? comp.b : comp.a;
      // Current flowing from the positive node through the source to the negative node.
      const double through = (voltages[comp.positive] - voltages[neg] - comp.voltage) / comp.resistance;
      current_ab = comp.positive == comp.a ? through : -through;
    }
    leaving[c.supernode[comp.a]] += current_ab;
    leaving[c.supernode[comp.b]] -= current_ab;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < c.supernode_count; ++i) {
    if (i != c.ground) worst = std::max(worst, std::abs(leaving[i]));
  }
  return worst;
}

}  // namespace wavegraph
