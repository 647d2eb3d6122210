#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gbopt/expressions.hpp"
#include "gbopt/kernels.hpp"

namespace gbopt {

using OracleFn = std::function<double(const Eigen::VectorXd&)>;

// Reference to one coordinate of an augmented state: either input x_j
// (0-based j) or the output z of an earlier node (by node index).
struct ParentRef {
    enum class Kind { Input, Node };
    Kind kind = Kind::Input;
    int index = 0;

    static ParentRef input(int j) { return ParentRef{Kind::Input, j}; }
    static ParentRef node(int i) { return ParentRef{Kind::Node, i}; }
    bool operator==(const ParentRef&) const = default;
};

struct NodeSpec {
    int id = 0;
    bool is_black = false;
    std::vector<ParentRef> parents;
    double lipschitz = 1.0;     // L_{φ_i}
    double output_bound = 1.0;  // C_{z,i+1}

    // white-box nodes
    Expression expr;

    // black-box nodes
    std::string oracle_id;  // lossless descriptor; also keys GP sharing
    OracleFn oracle;        // noiseless ground truth
    double rkhs_norm_bound = 0.0;  // B_i
    std::optional<Kernel> kernel;
};

struct AugmentedState {
    Eigen::VectorXd x;
    Eigen::VectorXd z_prefix;  // z_1..z_i (outputs of nodes 0..i-1)
};

Eigen::VectorXd gather_input(const AugmentedState& state, const std::vector<ParentRef>& parents);

class GreyBoxGraph {
public:
    int input_dim = 0;
    Eigen::VectorXd domain_lower;
    Eigen::VectorXd domain_upper;
    std::vector<NodeSpec> nodes;

    int node_count() const { return static_cast<int>(nodes.size()); }
    std::vector<int> white_set() const;
    std::vector<int> black_set() const;

    // Enforces acyclicity, arity/index consistency, positive constants,
    // C_{z,i+1} >= B_i for black nodes, and a non-empty hyperbox domain.
    void validate() const;

    bool in_domain(const Eigen::VectorXd& x, double tol = 1e-9) const;

    // Noiseless forward pass; returns z_1..z_m. f(x) = z_m.
    Eigen::VectorXd propagate_true(const Eigen::VectorXd& x) const;

    // Queries each black-box node at its planned augmented state
    // s̄_i = gather([x, z̄]) and perturbs with Gaussian noise of std sigma.
    std::map<int, double> evaluate_plan(const Eigen::VectorXd& x, const Eigen::VectorXd& z_plan,
                                        std::mt19937_64& rng, double sigma) const;

    // Coefficients A_i of β_{i,t}σ_{i,t−1} in the output discrepancy bound,
    // from unrolling e_{i+1} <= 2L_{φ_i}·Σ_j e_j (+ 2β_iσ_i for black nodes)
    // along the declared parent structure.
    std::map<int, double> discrepancy_constants() const;

    // Input vector for a node given x and the full z vector (length >= id).
    Eigen::VectorXd node_input(int node_id, const Eigen::VectorXd& x, const Eigen::VectorXd& z) const;
};

// ---- oracle descriptor registry ----
// Descriptors look like "scheme:payload"; "user:<name>" resolves through the
// named registry, other schemes through registered makers.
void register_oracle(const std::string& name, OracleFn fn);
void register_oracle_scheme(const std::string& scheme, std::function<OracleFn(const std::string&)> maker);
OracleFn resolve_oracle(const std::string& descriptor);

// ---- text round-trip ----
// Sections are "<prefix>graph" and "<prefix>node <i>".
class Config;
std::string graph_to_text(const GreyBoxGraph& graph, const std::string& prefix = "");
GreyBoxGraph graph_from_config(const Config& config, const std::string& prefix = "");
GreyBoxGraph graph_from_text(const std::string& text, const std::string& origin = "<graph>");

}  // namespace gbopt
