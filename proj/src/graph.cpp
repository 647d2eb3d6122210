#include "gbopt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gbopt/config.hpp"
#include "gbopt/errors.hpp"

namespace gbopt {

Eigen::VectorXd gather_input(const AugmentedState& state, const std::vector<ParentRef>& parents) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(parents.size()));
    for (std::size_t p = 0; p < parents.size(); ++p) {
        const ParentRef& ref = parents[p];
        if (ref.kind == ParentRef::Kind::Input) {
            if (ref.index < 0 || ref.index >= state.x.size()) {
                throw DimensionMismatchError("parent references input x" + std::to_string(ref.index + 1) +
                                             " outside the input dimension");
            }
            s[static_cast<Eigen::Index>(p)] = state.x[ref.index];
        } else {
            if (ref.index < 0 || ref.index >= state.z_prefix.size()) {
                throw DimensionMismatchError("parent references z" + std::to_string(ref.index + 1) +
                                             " beyond the available prefix");
            }
            s[static_cast<Eigen::Index>(p)] = state.z_prefix[ref.index];
        }
    }
    return s;
}

std::vector<int> GreyBoxGraph::white_set() const {
    std::vector<int> out;
    for (const NodeSpec& n : nodes) {
        if (!n.is_black) out.push_back(n.id);
    }
    return out;
}

std::vector<int> GreyBoxGraph::black_set() const {
    std::vector<int> out;
    for (const NodeSpec& n : nodes) {
        if (n.is_black) out.push_back(n.id);
    }
    return out;
}

void GreyBoxGraph::validate() const {
    if (input_dim < 1) throw EmptyDomainError("graph needs input_dim >= 1");
    if (domain_lower.size() != input_dim || domain_upper.size() != input_dim) {
        throw EmptyDomainError("domain bounds do not match input_dim");
    }
    for (int j = 0; j < input_dim; ++j) {
        if (!(domain_lower[j] <= domain_upper[j])) {
            throw EmptyDomainError("domain is empty in coordinate x" + std::to_string(j + 1));
        }
    }
    if (nodes.empty()) throw CyclicGraphError("graph has no nodes");

    for (int i = 0; i < node_count(); ++i) {
        const NodeSpec& n = nodes[i];
        if (n.id != i) throw CyclicGraphError("node ids must be 0..m-1 in order");
        if (!(n.lipschitz > 0.0)) throw BoundViolationError("node " + std::to_string(i) + " needs lipschitz > 0");
        if (!(n.output_bound > 0.0)) {
            throw BoundViolationError("node " + std::to_string(i) + " needs output_bound > 0");
        }
        if (n.parents.empty()) throw CyclicGraphError("node " + std::to_string(i) + " has no parents");
        for (const ParentRef& ref : n.parents) {
            if (ref.kind == ParentRef::Kind::Input) {
                if (ref.index < 0 || ref.index >= input_dim) {
                    throw CyclicGraphError("node " + std::to_string(i) + " references input x" +
                                           std::to_string(ref.index + 1) + " outside the domain");
                }
            } else {
                if (ref.index >= i) {
                    throw CyclicGraphError("node " + std::to_string(i) + " depends on z" +
                                           std::to_string(ref.index + 1) +
                                           " which is not an earlier node output");
                }
                if (ref.index < 0) throw CyclicGraphError("negative parent index");
            }
        }
        if (n.is_black) {
            if (!(n.rkhs_norm_bound > 0.0)) {
                throw BoundViolationError("black node " + std::to_string(i) + " needs rkhs_norm_bound > 0");
            }
            if (n.output_bound < n.rkhs_norm_bound) {
                throw BoundViolationError("black node " + std::to_string(i) + " violates C >= B (C=" +
                                          format_double(n.output_bound) + ", B=" +
                                          format_double(n.rkhs_norm_bound) + ")");
            }
            if (!n.kernel.has_value()) {
                throw BoundViolationError("black node " + std::to_string(i) + " needs a kernel");
            }
            if (!n.oracle) {
                throw BoundViolationError("black node " + std::to_string(i) + " has no resolvable oracle");
            }
        } else {
            if (!n.expr.valid()) throw BoundViolationError("white node " + std::to_string(i) + " has no expression");
            if (n.expr.arity >= 0 && n.expr.arity != static_cast<int>(n.parents.size())) {
                throw DimensionMismatchError("white node " + std::to_string(i) + " expression arity " +
                                             std::to_string(n.expr.arity) + " does not match parent count " +
                                             std::to_string(n.parents.size()));
            }
        }
    }
}

bool GreyBoxGraph::in_domain(const Eigen::VectorXd& x, double tol) const {
    if (x.size() != input_dim) return false;
    for (int j = 0; j < input_dim; ++j) {
        if (x[j] < domain_lower[j] - tol || x[j] > domain_upper[j] + tol) return false;
    }
    return true;
}

Eigen::VectorXd GreyBoxGraph::node_input(int node_id, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& z) const {
    AugmentedState state{x, z.head(std::min<Eigen::Index>(z.size(), node_id))};
    return gather_input(state, nodes[node_id].parents);
}

Eigen::VectorXd GreyBoxGraph::propagate_true(const Eigen::VectorXd& x) const {
    if (!in_domain(x)) throw DomainViolationError("propagate_true: x outside the input domain");
    const int m = node_count();
    Eigen::VectorXd z(m);
    for (int i = 0; i < m; ++i) {
        const NodeSpec& n = nodes[i];
        const Eigen::VectorXd s = node_input(i, x, z);
        const double value = n.is_black ? n.oracle(s) : n.expr(s);
        if (std::abs(value) > n.output_bound + 1e-9) {
            throw OutputBoundViolationError("node " + std::to_string(i) + " produced |z|=" +
                                            format_double(std::abs(value)) + " > C=" +
                                            format_double(n.output_bound));
        }
        z[i] = value;
    }
    return z;
}

std::map<int, double> GreyBoxGraph::evaluate_plan(const Eigen::VectorXd& x, const Eigen::VectorXd& z_plan,
                                                  std::mt19937_64& rng, double sigma) const {
    if (!in_domain(x)) throw DomainViolationError("evaluate_plan: x outside the input domain");
    if (z_plan.size() != node_count()) {
        throw DimensionMismatchError("evaluate_plan: plan length does not match node count");
    }
    std::map<int, double> observations;
    std::normal_distribution<double> noise(0.0, 1.0);
    for (const NodeSpec& n : nodes) {
        if (!n.is_black) continue;
        const Eigen::VectorXd s = node_input(n.id, x, z_plan);
        double y = n.oracle(s);
        if (sigma > 0.0) y += sigma * noise(rng);
        observations[n.id] = y;
    }
    return observations;
}

std::map<int, double> GreyBoxGraph::discrepancy_constants() const {
    const int m = node_count();
    // coefficients of each z_{i+1} error bound in the basis {β_jσ_j : j black}
    std::vector<Eigen::VectorXd> coeff(m, Eigen::VectorXd::Zero(m));
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
        for (const ParentRef& ref : nodes[i].parents) {
            if (ref.kind == ParentRef::Kind::Node) acc += coeff[ref.index];
        }
        coeff[i] = 2.0 * nodes[i].lipschitz * acc;
        if (nodes[i].is_black) coeff[i][i] += 2.0;
    }
    std::map<int, double> A;
    for (const NodeSpec& n : nodes) {
        if (n.is_black) A[n.id] = coeff[m - 1][n.id];
    }
    return A;
}

// ---- oracle registry ----

namespace {

std::map<std::string, OracleFn>& named_oracles() {
    static std::map<std::string, OracleFn> registry;
    return registry;
}

std::map<std::string, std::function<OracleFn(const std::string&)>>& oracle_schemes() {
    static std::map<std::string, std::function<OracleFn(const std::string&)>> registry;
    return registry;
}

}  // namespace

void register_oracle(const std::string& name, OracleFn fn) { named_oracles()[name] = std::move(fn); }

void register_oracle_scheme(const std::string& scheme, std::function<OracleFn(const std::string&)> maker) {
    oracle_schemes()[scheme] = std::move(maker);
}

OracleFn resolve_oracle(const std::string& descriptor) {
    const auto colon = descriptor.find(':');
    const std::string scheme = colon == std::string::npos ? descriptor : descriptor.substr(0, colon);
    const std::string payload = colon == std::string::npos ? std::string() : descriptor.substr(colon + 1);
    if (scheme == "user") {
        auto it = named_oracles().find(payload);
        if (it == named_oracles().end()) throw ConfigParseError("unknown user oracle '" + payload + "'");
        return it->second;
    }
    auto it = oracle_schemes().find(scheme);
    if (it == oracle_schemes().end()) {
        throw ConfigParseError("unknown oracle scheme '" + scheme + "' in '" + descriptor + "'");
    }
    return it->second(descriptor);
}

// ---- text round-trip ----

namespace {

std::string parents_text(const std::vector<ParentRef>& parents) {
    std::ostringstream out;
    for (std::size_t p = 0; p < parents.size(); ++p) {
        if (p) out << ' ';
        if (parents[p].kind == ParentRef::Kind::Input) {
            out << 'x' << parents[p].index + 1;
        } else {
            out << 'z' << parents[p].index + 1;
        }
    }
    return out.str();
}

std::vector<ParentRef> parse_parents(const std::vector<std::string>& tokens) {
    std::vector<ParentRef> parents;
    for (const std::string& tok : tokens) {
        if (tok.size() < 2 || (tok[0] != 'x' && tok[0] != 'z')) {
            throw ConfigParseError("bad parent token '" + tok + "' (expected x<j> or z<j>)");
        }
        int index = 0;
        try {
            index = std::stoi(tok.substr(1));
        } catch (const std::exception&) {
            throw ConfigParseError("bad parent token '" + tok + "'");
        }
        if (index < 1) throw ConfigParseError("parent indices are 1-based: '" + tok + "'");
        parents.push_back(tok[0] == 'x' ? ParentRef::input(index - 1) : ParentRef::node(index - 1));
    }
    return parents;
}

std::string vector_tokens(const Eigen::VectorXd& v) {
    std::ostringstream out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out << ' ';
        out << format_double(v[i]);
    }
    return out.str();
}

}  // namespace

std::string graph_to_text(const GreyBoxGraph& graph, const std::string& prefix) {
    std::ostringstream out;
    out << "[" << prefix << "graph]\n";
    out << "input_dim = " << graph.input_dim << "\n";
    out << "domain_lower = " << vector_tokens(graph.domain_lower) << "\n";
    out << "domain_upper = " << vector_tokens(graph.domain_upper) << "\n";
    for (const NodeSpec& n : graph.nodes) {
        out << "\n[" << prefix << "node " << n.id << "]\n";
        out << "kind = " << (n.is_black ? "black" : "white") << "\n";
        out << "parents = " << parents_text(n.parents) << "\n";
        out << "L = " << format_double(n.lipschitz) << "\n";
        out << "C = " << format_double(n.output_bound) << "\n";
        if (n.is_black) {
            out << "oracle = " << n.oracle_id << "\n";
            out << "B = " << format_double(n.rkhs_norm_bound) << "\n";
            out << "kernel = " << n.kernel->to_string() << "\n";
        } else {
            out << "expr = " << n.expr.descriptor << "\n";
        }
    }
    return out.str();
}

GreyBoxGraph graph_from_config(const Config& config, const std::string& prefix) {
    GreyBoxGraph graph;
    const ConfigSection& header = config.require(prefix + "graph");
    graph.input_dim = header.get_int("input_dim");
    const auto lower = header.get_doubles("domain_lower");
    const auto upper = header.get_doubles("domain_upper");
    graph.domain_lower = Eigen::Map<const Eigen::VectorXd>(lower.data(), static_cast<Eigen::Index>(lower.size()));
    graph.domain_upper = Eigen::Map<const Eigen::VectorXd>(upper.data(), static_cast<Eigen::Index>(upper.size()));

    for (int i = 0;; ++i) {
        const ConfigSection* section = config.find(prefix + "node " + std::to_string(i));
        if (!section) break;
        NodeSpec n;
        n.id = i;
        const std::string kind = section->get("kind");
        if (kind == "black") {
            n.is_black = true;
        } else if (kind == "white") {
            n.is_black = false;
        } else {
            throw ConfigParseError("node " + std::to_string(i) + ": kind must be black or white, got '" + kind + "'");
        }
        n.parents = parse_parents(section->get_strings("parents"));
        n.lipschitz = section->get_double("L");
        n.output_bound = section->get_double("C");
        if (n.is_black) {
            n.oracle_id = section->get("oracle");
            n.oracle = resolve_oracle(n.oracle_id);
            n.rkhs_norm_bound = section->get_double("B");
            n.kernel = Kernel::parse(section->get("kernel"));
        } else {
            n.expr = parse_expression(section->get("expr"));
        }
        graph.nodes.push_back(std::move(n));
    }
    if (graph.nodes.empty()) throw ConfigParseError("graph config declares no [node i] sections");
    graph.validate();
    return graph;
}

GreyBoxGraph graph_from_text(const std::string& text, const std::string& origin) {
    return graph_from_config(Config::parse_string(text, origin));
}

}  // namespace gbopt
