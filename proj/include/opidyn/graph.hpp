#pragma once

#include "opidyn/matrix.hpp"

#include <cstddef>
#include <vector>

namespace opidyn {

struct Arc {
    int source = 0;
    int target = 0;
    double weight = 0.0;
};

// Directed weighted graph under the influence-matrix convention:
// arc (i,j) exists iff a_ji > 0, carrying weight a_ji. Node indices are
// 0-based internally and 1-based in human-facing output.
class DirectedWeightedGraph {
public:
    DirectedWeightedGraph(int node_count, std::vector<Arc> arcs);

    int node_count() const { return n_; }
    std::size_t arc_count() const { return arcs_.size(); }
    const std::vector<Arc>& arcs() const { return arcs_; }
    const std::vector<int>& successors(int node) const { return successors_[node]; }
    bool has_arc(int source, int target) const;

private:
    int n_;
    std::vector<Arc> arcs_;
    std::vector<std::vector<int>> successors_;
};

DirectedWeightedGraph graph_from_matrix(const Matrix& a);

struct StrongComponentDecomposition {
    // Maximal strongly connected components in reverse topological order of
    // the condensation (sinks first), ties broken by smallest contained node;
    // node lists sorted ascending.
    std::vector<std::vector<int>> components;
    // closed[c]: no arc enters components[c] from another component.
    std::vector<bool> closed;
    // Forward topological order of the condensation (indices into components).
    std::vector<int> condensation_order;
    // node -> index into components.
    std::vector<int> component_of;
};

StrongComponentDecomposition strong_components(const DirectedWeightedGraph& g);

struct RootReport {
    std::vector<int> roots;  // nodes with walks to all others
    bool quasi_strong = false;
};

RootReport roots_and_quasi_strong(const DirectedWeightedGraph& g);

struct ComponentPeriod {
    int period = 1;
    bool has_cycle = false;  // false only for a singleton without self-loop
};

// Period (gcd of cycle lengths) of one strongly connected component.
ComponentPeriod component_period(const DirectedWeightedGraph& g,
                                 const std::vector<int>& component);

std::vector<ComponentPeriod> component_periods(const DirectedWeightedGraph& g,
                                               const StrongComponentDecomposition& scc);

// Nodes whose only incoming arc, if any, is their self-loop.
std::vector<int> source_nodes(const DirectedWeightedGraph& g);

// Seed nodes plus everything reachable from them by walks; sorted.
std::vector<int> reachable_from(const DirectedWeightedGraph& g, const std::vector<int>& seeds);

}  // namespace opidyn
