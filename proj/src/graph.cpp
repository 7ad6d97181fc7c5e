#include "opidyn/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <string>

namespace opidyn {

namespace {

void check_node(int node, int n, const char* what) {
    if (node < 0 || node >= n) {
        throw std::invalid_argument(std::string(what) + ": node index " + std::to_string(node) +
                                    " out of range [0," + std::to_string(n) + ")");
    }
}

}  // namespace

DirectedWeightedGraph::DirectedWeightedGraph(int node_count, std::vector<Arc> arcs)
    : n_(node_count), arcs_(std::move(arcs)), successors_(static_cast<std::size_t>(std::max(node_count, 0))) {
    if (n_ <= 0) throw std::invalid_argument("DirectedWeightedGraph: node count must be positive");
    std::set<std::pair<int, int>> seen;
    for (const Arc& arc : arcs_) {
        check_node(arc.source, n_, "DirectedWeightedGraph");
        check_node(arc.target, n_, "DirectedWeightedGraph");
        if (!(arc.weight > 0.0)) {
            throw std::domain_error("DirectedWeightedGraph: arc (" + std::to_string(arc.source + 1) +
                                    "," + std::to_string(arc.target + 1) + ") has non-positive weight " +
                                    std::to_string(arc.weight));
        }
        if (!seen.insert({arc.source, arc.target}).second) {
            throw std::invalid_argument("DirectedWeightedGraph: duplicate arc (" +
                                        std::to_string(arc.source + 1) + "," +
                                        std::to_string(arc.target + 1) + ")");
        }
        successors_[arc.source].push_back(arc.target);
    }
}

bool DirectedWeightedGraph::has_arc(int source, int target) const {
    check_node(source, n_, "has_arc");
    check_node(target, n_, "has_arc");
    const auto& succ = successors_[source];
    return std::find(succ.begin(), succ.end(), target) != succ.end();
}

DirectedWeightedGraph graph_from_matrix(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw std::invalid_argument("graph_from_matrix: matrix must be square and non-empty");
    }
    const int n = static_cast<int>(a.rows());
    std::vector<Arc> arcs;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double w = a(j, i);  // arc (i,j) iff a_ji > 0
            if (w < 0.0) {
                throw std::domain_error("graph_from_matrix: negative entry at (" +
                                        std::to_string(j + 1) + "," + std::to_string(i + 1) +
                                        ") = " + std::to_string(w));
            }
            if (w > 0.0) arcs.push_back({i, j, w});
        }
    }
    return DirectedWeightedGraph(n, std::move(arcs));
}

StrongComponentDecomposition strong_components(const DirectedWeightedGraph& g) {
    const int n = g.node_count();

    // Iterative Tarjan; the explicit frame stack keeps n ~ 1e5 feasible.
    std::vector<int> index(n, -1), lowlink(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    std::vector<std::vector<int>> raw_components;
    int next_index = 0;

    struct Frame {
        int node;
        std::size_t child;
    };
    std::vector<Frame> frames;

    for (int start = 0; start < n; ++start) {
        if (index[start] != -1) continue;
        frames.push_back({start, 0});
        while (!frames.empty()) {
            Frame& frame = frames.back();
            const int v = frame.node;
            if (frame.child == 0) {
                index[v] = lowlink[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            const auto& succ = g.successors(v);
            bool descended = false;
            while (frame.child < succ.size()) {
                const int w = succ[frame.child++];
                if (index[w] == -1) {
                    frames.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
            }
            if (descended) continue;
            if (lowlink[v] == index[v]) {
                std::vector<int> component;
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    component.push_back(w);
                } while (w != v);
                std::sort(component.begin(), component.end());
                raw_components.push_back(std::move(component));
            }
            frames.pop_back();
            if (!frames.empty()) {
                lowlink[frames.back().node] = std::min(lowlink[frames.back().node], lowlink[v]);
            }
        }
    }

    const int k = static_cast<int>(raw_components.size());
    std::vector<int> raw_of(n, -1);
    for (int c = 0; c < k; ++c) {
        for (int v : raw_components[c]) raw_of[v] = c;
    }

    // Condensation arcs and closed flags.
    std::vector<std::set<int>> cond_succ(k);
    std::vector<bool> raw_closed(k, true);
    for (const Arc& arc : g.arcs()) {
        const int cu = raw_of[arc.source];
        const int cv = raw_of[arc.target];
        if (cu != cv) {
            cond_succ[cu].insert(cv);
            raw_closed[cv] = false;
        }
    }

    // Canonical reverse topological order: sinks first, ties by smallest
    // contained node.
    std::vector<int> out_degree(k);
    std::vector<std::vector<int>> cond_pred(k);
    for (int c = 0; c < k; ++c) {
        out_degree[c] = static_cast<int>(cond_succ[c].size());
        for (int d : cond_succ[c]) cond_pred[d].push_back(c);
    }
    auto by_smallest_node = [&](int lhs, int rhs) {
        return raw_components[lhs][0] > raw_components[rhs][0];  // min-heap
    };
    std::priority_queue<int, std::vector<int>, decltype(by_smallest_node)> ready(by_smallest_node);
    for (int c = 0; c < k; ++c) {
        if (out_degree[c] == 0) ready.push(c);
    }
    std::vector<int> order;
    order.reserve(k);
    while (!ready.empty()) {
        const int c = ready.top();
        ready.pop();
        order.push_back(c);
        for (int p : cond_pred[c]) {
            if (--out_degree[p] == 0) ready.push(p);
        }
    }

    StrongComponentDecomposition result;
    result.components.reserve(k);
    result.closed.reserve(k);
    result.component_of.assign(n, -1);
    for (int c : order) {
        result.closed.push_back(raw_closed[c]);
        result.components.push_back(std::move(raw_components[c]));
    }
    for (int c = 0; c < k; ++c) {
        for (int v : result.components[c]) result.component_of[v] = c;
    }
    result.condensation_order.resize(k);
    std::iota(result.condensation_order.rbegin(), result.condensation_order.rend(), 0);
    return result;
}

RootReport roots_and_quasi_strong(const DirectedWeightedGraph& g) {
    const StrongComponentDecomposition scc = strong_components(g);
    int closed_count = 0;
    int closed_index = -1;
    for (int c = 0; c < static_cast<int>(scc.components.size()); ++c) {
        if (scc.closed[c]) {
            ++closed_count;
            closed_index = c;
        }
    }
    RootReport report;
    report.quasi_strong = (closed_count == 1);
    if (report.quasi_strong) report.roots = scc.components[closed_index];
    return report;
}

ComponentPeriod component_period(const DirectedWeightedGraph& g,
                                 const std::vector<int>& component) {
    if (component.empty()) {
        throw std::invalid_argument("component_period: empty component");
    }
    const int n = g.node_count();
    std::vector<char> member(n, 0);
    for (int v : component) {
        check_node(v, n, "component_period");
        member[v] = 1;
    }

    // BFS level labels from an arbitrary member; the component is strongly
    // connected, so the whole component is reached.
    std::vector<int> level(n, -1);
    std::queue<int> queue;
    level[component[0]] = 0;
    queue.push(component[0]);
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop();
        for (int w : g.successors(v)) {
            if (member[w] && level[w] == -1) {
                level[w] = level[v] + 1;
                queue.push(w);
            }
        }
    }

    long long gcd = 0;
    bool has_intra_arc = false;
    for (int v : component) {
        for (int w : g.successors(v)) {
            if (!member[w]) continue;
            has_intra_arc = true;
            gcd = std::gcd(gcd, static_cast<long long>(std::abs(level[v] + 1 - level[w])));
        }
    }
    if (!has_intra_arc) return {1, false};
    return {gcd == 0 ? 1 : static_cast<int>(gcd), true};
}

std::vector<ComponentPeriod> component_periods(const DirectedWeightedGraph& g,
                                               const StrongComponentDecomposition& scc) {
    std::vector<ComponentPeriod> periods;
    periods.reserve(scc.components.size());
    for (const auto& component : scc.components) {
        periods.push_back(component_period(g, component));
    }
    return periods;
}

std::vector<int> source_nodes(const DirectedWeightedGraph& g) {
    std::vector<int> external_in_degree(g.node_count(), 0);
    for (const Arc& arc : g.arcs()) {
        if (arc.source != arc.target) ++external_in_degree[arc.target];
    }
    std::vector<int> sources;
    for (int v = 0; v < g.node_count(); ++v) {
        if (external_in_degree[v] == 0) sources.push_back(v);
    }
    return sources;
}

std::vector<int> reachable_from(const DirectedWeightedGraph& g, const std::vector<int>& seeds) {
    std::vector<char> visited(g.node_count(), 0);
    std::queue<int> queue;
    for (int seed : seeds) {
        check_node(seed, g.node_count(), "reachable_from");
        if (!visited[seed]) {
            visited[seed] = 1;
            queue.push(seed);
        }
    }
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop();
        for (int w : g.successors(v)) {
            if (!visited[w]) {
                visited[w] = 1;
                queue.push(w);
            }
        }
    }
    std::vector<int> result;
    for (int v = 0; v < g.node_count(); ++v) {
        if (visited[v]) result.push_back(v);
    }
    return result;
}

}  // namespace opidyn
