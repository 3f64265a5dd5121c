#pragma once

// DC power network sensitivities and gas network adjacency.

#include <vector>

#include <Eigen/Dense>

#include "ndcgem/common.hpp"
#include "ndcgem/model.hpp"

namespace ndcgem {

// Line-by-bus injection shift factors.  Column of the slack bus is zero;
// flow on line q for injections p is sum_m ptdf(q, m) * p_m, measured in the
// from->to direction.
struct PtdfMatrix {
  int n_lines = 0;
  int n_buses = 0;
  int slack = 0;
  std::vector<double> data;  // row-major, lines x buses

  double operator()(int line, int bus) const { return data[line * n_buses + bus]; }
};

inline PtdfMatrix compute_ptdf(const JointSystem& sys) {
  const int nb = sys.n_buses();
  const int nl = static_cast<int>(sys.lines.size());
  const int slack = sys.bus_index.at(sys.slack_bus);

  // Reduced nodal susceptance matrix (slack row/col removed).
  auto red = [&](int b) { return b < slack ? b : b - 1; };
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nb - 1, nb - 1);
  for (const auto& l : sys.lines) {
    const int i = sys.bus_index.at(l.from_bus);
    const int j = sys.bus_index.at(l.to_bus);
    const double y = 1.0 / l.reactance;
    if (i != slack) B(red(i), red(i)) += y;
    if (j != slack) B(red(j), red(j)) += y;
    if (i != slack && j != slack) {
      B(red(i), red(j)) -= y;
      B(red(j), red(i)) -= y;
    }
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu;
  if (nb > 1) {
    lu.compute(B);
    if (!lu.isInvertible())
      throw ValidationError("power network is not connected (singular susceptance matrix)");
  }

  PtdfMatrix ptdf;
  ptdf.n_lines = nl;
  ptdf.n_buses = nb;
  ptdf.slack = slack;
  ptdf.data.assign(static_cast<size_t>(nl) * nb, 0.0);
  if (nb == 1) return ptdf;

  // Angles for a unit injection at bus m (withdrawn at slack), then flows.
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(nb - 1, nb);
  for (int m = 0; m < nb; ++m) {
    if (m == slack) continue;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nb - 1);
    rhs(red(m)) = 1.0;
    theta.col(m) = lu.solve(rhs);
  }
  for (int q = 0; q < nl; ++q) {
    const auto& l = sys.lines[q];
    const int i = sys.bus_index.at(l.from_bus);
    const int j = sys.bus_index.at(l.to_bus);
    const double y = 1.0 / l.reactance;
    for (int m = 0; m < nb; ++m) {
      if (m == slack) continue;
      const double ti = (i == slack) ? 0.0 : theta(red(i), m);
      const double tj = (j == slack) ? 0.0 : theta(red(j), m);
      ptdf.data[q * nb + m] = y * (ti - tj);
    }
  }
  return ptdf;
}

// Per-node incidence sets of the gas network.
struct GasNodeAdjacency {
  // (branch index, +1 if the branch enters this node / -1 if it leaves).
  std::vector<std::pair<int, int>> pipelines;
  std::vector<std::pair<int, int>> compressors;
  std::vector<int> suppliers;
  std::vector<int> loads;
  std::vector<int> gfus;      // unit indices delivering here
  std::vector<int> taps;      // compressors drawing fuel here
};

struct GasAdjacency {
  std::vector<GasNodeAdjacency> node;

  const GasNodeAdjacency& at(int n) const { return node[n]; }
};

inline GasAdjacency gas_adjacency(const JointSystem& sys) {
  GasAdjacency adj;
  adj.node.resize(sys.n_gas_nodes());
  for (size_t p = 0; p < sys.pipelines.size(); ++p) {
    const int from = sys.gas_node_index.at(sys.pipelines[p].from_node);
    const int to = sys.gas_node_index.at(sys.pipelines[p].to_node);
    adj.node[from].pipelines.emplace_back(static_cast<int>(p), -1);
    adj.node[to].pipelines.emplace_back(static_cast<int>(p), +1);
  }
  for (size_t c = 0; c < sys.compressors.size(); ++c) {
    const int from = sys.gas_node_index.at(sys.compressors[c].from_node);
    const int to = sys.gas_node_index.at(sys.compressors[c].to_node);
    adj.node[from].compressors.emplace_back(static_cast<int>(c), -1);
    adj.node[to].compressors.emplace_back(static_cast<int>(c), +1);
    adj.node[sys.gas_node_index.at(sys.compressors[c].tap_node)].taps.push_back(
        static_cast<int>(c));
  }
  for (size_t s = 0; s < sys.suppliers.size(); ++s)
    adj.node[sys.gas_node_index.at(sys.suppliers[s].node)].suppliers.push_back(
        static_cast<int>(s));
  for (size_t d = 0; d < sys.gas_loads.size(); ++d)
    adj.node[sys.gas_node_index.at(sys.gas_loads[d].node)].loads.push_back(
        static_cast<int>(d));
  for (size_t g = 0; g < sys.units.size(); ++g)
    if (sys.units[g].is_gfu)
      adj.node[sys.gas_node_index.at(sys.units[g].gas_node)].gfus.push_back(
          static_cast<int>(g));
  return adj;
}

}  // namespace ndcgem
