#include "gbopt/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "gbopt/config.hpp"
#include "gbopt/errors.hpp"
#include "gbopt/rng.hpp"

namespace gbopt {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd broadcast_lengthscales(const Kernel& kernel, int dim) {
    const Eigen::VectorXd& ls = kernel.lengthscales();
    if (ls.size() == dim) return ls;
    if (ls.size() == 1) return Eigen::VectorXd::Constant(dim, ls[0]);
    throw DimensionMismatchError("kernel lengthscales do not match requested dimension");
}

std::map<std::string, std::string> parse_descriptor_params(const std::string& descriptor) {
    const auto parts = split_tokens(descriptor, ':');
    std::map<std::string, std::string> kv;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string::npos) {
            throw ConfigParseError("malformed oracle parameter '" + parts[i] + "' in '" + descriptor + "'");
        }
        kv[parts[i].substr(0, eq)] = parts[i].substr(eq + 1);
    }
    return kv;
}

const std::string& need_param(const std::map<std::string, std::string>& kv, const std::string& key,
                              const std::string& descriptor) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigParseError("oracle '" + descriptor + "' is missing parameter '" + key + "'");
    return it->second;
}

Eigen::VectorXd parse_number_list(const std::string& text) {
    const auto items = split_tokens(text, ',');
    Eigen::VectorXd v(static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) v[static_cast<Eigen::Index>(i)] = std::stod(items[i]);
    return v;
}

std::string number_list(const Eigen::VectorXd& v) {
    std::ostringstream out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out << ',';
        out << format_double(v[i]);
    }
    return out.str();
}

}  // namespace

// ---- RFF sampler ----

RffFunction::RffFunction(const Kernel& kernel, std::uint64_t seed, int feature_count, int dim)
    : kernel_(kernel), seed_(seed), dim_(dim) {
    if (kernel.family() != Kernel::Family::SquaredExponential) {
        throw UnsupportedKernelError("sample_gp_function supports only squared-exponential kernels");
    }
    if (feature_count < 1 || dim < 1) throw DimensionMismatchError("rff needs feature_count >= 1, dim >= 1");
    const Eigen::VectorXd ls = broadcast_lengthscales(kernel, dim);

    std::mt19937_64 rng = make_rng(seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * kPi);

    omega_.resize(feature_count, dim);
    phase_.resize(feature_count);
    weights_.resize(feature_count);
    for (int j = 0; j < feature_count; ++j) {
        for (int i = 0; i < dim; ++i) omega_(j, i) = normal(rng) / ls[i];
        phase_[j] = uniform(rng);
    }
    for (int j = 0; j < feature_count; ++j) weights_[j] = normal(rng);
    amplitude_ = std::sqrt(2.0 * kernel.scale() / feature_count);
}

double RffFunction::operator()(const Eigen::VectorXd& x) const {
    if (x.size() != dim_) throw DimensionMismatchError("rff input dimension mismatch");
    const Eigen::VectorXd angles = omega_ * x + phase_;
    return amplitude_ * weights_.dot(angles.array().cos().matrix());
}

double RffFunction::induced_covariance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    if (a.size() != dim_ || b.size() != dim_) {
        throw DimensionMismatchError("rff input dimension mismatch");
    }
    const Eigen::VectorXd ca = (omega_ * a + phase_).array().cos();
    const Eigen::VectorXd cb = (omega_ * b + phase_).array().cos();
    return amplitude_ * amplitude_ * ca.dot(cb);
}

std::string RffFunction::descriptor() const {
    std::ostringstream out;
    out << "rff:dim=" << dim_ << ":count=" << weights_.size()
        << ":ls=" << number_list(broadcast_lengthscales(kernel_, dim_))
        << ":scale=" << format_double(kernel_.scale()) << ":seed=" << seed_;
    return out.str();
}

RffFunction sample_gp_function(const Kernel& kernel, std::uint64_t seed, int feature_count, int dim) {
    return RffFunction(kernel, seed, feature_count, dim);
}

// ---- kernel expansions ----

double KernelExpansion::operator()(const Eigen::VectorXd& s) const {
    double value = 0.0;
    for (Eigen::Index j = 0; j < weights.size(); ++j) {
        value += weights[j] * kernel(centers.row(j).transpose(), s);
    }
    return value;
}

void KernelExpansion::rescale_to_norm(double target) {
    if (!(norm > 0.0)) throw NumericalBreakdownError("cannot rescale a zero-norm kernel expansion");
    weights *= target / norm;
    norm = target;
}

KernelExpansion sample_kernel_expansion(const Kernel& kernel, std::uint64_t seed, int count,
                                        const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                        double target_norm) {
    if (count < 1) throw DimensionMismatchError("kernel expansion needs count >= 1");
    KernelExpansion e;
    e.kernel = kernel;
    e.centers.resize(count, lo.size());
    e.weights.resize(count);

    std::mt19937_64 rng = make_rng(seed, 0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int j = 0; j < count; ++j) {
        for (Eigen::Index i = 0; i < lo.size(); ++i) {
            e.centers(j, i) = lo[i] + uniform(rng) * (hi[i] - lo[i]);
        }
    }
    for (int j = 0; j < count; ++j) e.weights[j] = normal(rng);

    const Eigen::MatrixXd K = kernel.gram(e.centers);
    e.norm = std::sqrt(std::max(0.0, e.weights.dot(K * e.weights)));
    e.rescale_to_norm(target_norm);
    return e;
}

// ---- grid utilities ----

int default_grid_axis_points(int dim) {
    if (dim <= 2) return 201;
    if (dim == 3) return 61;
    return 31;
}

Eigen::MatrixXd dense_grid(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int points_per_axis) {
    const int d = static_cast<int>(lo.size());
    if (points_per_axis < 2) throw EmptyDomainError("dense_grid needs >= 2 points per axis");
    long long total = 1;
    for (int i = 0; i < d; ++i) {
        total *= points_per_axis;
        if (total > (1ll << 24)) throw NumericalBreakdownError("dense grid too large");
    }
    Eigen::MatrixXd grid(total, d);
    std::vector<int> idx(d, 0);
    for (long long r = 0; r < total; ++r) {
        for (int i = 0; i < d; ++i) {
            grid(r, i) = lo[i] + (hi[i] - lo[i]) * idx[i] / (points_per_axis - 1);
        }
        for (int i = d - 1; i >= 0; --i) {
            if (++idx[i] < points_per_axis) break;
            idx[i] = 0;
        }
    }
    return grid;
}

double estimate_lipschitz(const OracleFn& fn, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                          int points_per_axis) {
    const Eigen::MatrixXd grid = dense_grid(lo, hi, points_per_axis);
    const int d = static_cast<int>(lo.size());
    Eigen::VectorXd values(grid.rows());
    for (Eigen::Index r = 0; r < grid.rows(); ++r) values[r] = fn(grid.row(r).transpose());

    // strides of the odometer layout: last axis varies fastest
    std::vector<long long> stride(d, 1);
    for (int i = d - 2; i >= 0; --i) stride[i] = stride[i + 1] * points_per_axis;

    double slope = 0.0;
    std::vector<int> idx(d, 0);
    for (Eigen::Index r = 0; r < grid.rows(); ++r) {
        for (int i = 0; i < d; ++i) {
            if (idx[i] + 1 < points_per_axis) {
                const double h = (hi[i] - lo[i]) / (points_per_axis - 1);
                if (h > 0) {
                    slope = std::max(slope, std::abs(values[r + stride[i]] - values[r]) / h);
                }
            }
        }
        for (int i = d - 1; i >= 0; --i) {
            if (++idx[i] < points_per_axis) break;
            idx[i] = 0;
        }
    }
    return 1.2 * slope;
}

double grid_max_abs(const OracleFn& fn, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                    int points_per_axis) {
    const Eigen::MatrixXd grid = dense_grid(lo, hi, points_per_axis);
    double best = 0.0;
    for (Eigen::Index r = 0; r < grid.rows(); ++r) best = std::max(best, std::abs(fn(grid.row(r).transpose())));
    return best;
}

// ---- oracle scheme registration ----

namespace {

Kernel kernel_from_params(const std::map<std::string, std::string>& kv, const std::string& descriptor) {
    const Eigen::VectorXd ls = parse_number_list(need_param(kv, "ls", descriptor));
    const double scale = std::stod(need_param(kv, "scale", descriptor));
    return Kernel::squared_exponential(ls, scale);
}

OracleFn make_rff_oracle(const std::string& descriptor) {
    const auto kv = parse_descriptor_params(descriptor);
    const int dim = std::stoi(need_param(kv, "dim", descriptor));
    const int count = std::stoi(need_param(kv, "count", descriptor));
    const std::uint64_t seed = std::stoull(need_param(kv, "seed", descriptor));
    const RffFunction fn(kernel_from_params(kv, descriptor), seed, count, dim);
    return [fn](const Eigen::VectorXd& x) { return fn(x); };
}

KernelExpansion build_kexp(const std::string& descriptor) {
    const auto kv = parse_descriptor_params(descriptor);
    const int count = std::stoi(need_param(kv, "count", descriptor));
    const std::uint64_t seed = std::stoull(need_param(kv, "seed", descriptor));
    const Eigen::VectorXd lo = parse_number_list(need_param(kv, "lo", descriptor));
    const Eigen::VectorXd hi = parse_number_list(need_param(kv, "hi", descriptor));
    const double norm = std::stod(need_param(kv, "norm", descriptor));
    return sample_kernel_expansion(kernel_from_params(kv, descriptor), seed, count, lo, hi, norm);
}

std::string kexp_descriptor(const Kernel& kernel, std::uint64_t seed, int count,
                            const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, double norm) {
    std::ostringstream out;
    out << "kexp:count=" << count << ":ls=" << number_list(broadcast_lengthscales(kernel, static_cast<int>(lo.size())))
        << ":scale=" << format_double(kernel.scale()) << ":seed=" << seed << ":lo=" << number_list(lo)
        << ":hi=" << number_list(hi) << ":norm=" << format_double(norm);
    return out.str();
}

// Positive expansion rescaled so its dense-grid minimum equals eps exactly.
KernelExpansion build_kexpmin(const std::string& descriptor, double* out_eps = nullptr) {
    const auto kv = parse_descriptor_params(descriptor);
    const int count = std::stoi(need_param(kv, "count", descriptor));
    const std::uint64_t seed = std::stoull(need_param(kv, "seed", descriptor));
    const Eigen::VectorXd lo = parse_number_list(need_param(kv, "lo", descriptor));
    const Eigen::VectorXd hi = parse_number_list(need_param(kv, "hi", descriptor));
    const double eps = std::stod(need_param(kv, "eps", descriptor));
    const int grid = std::stoi(need_param(kv, "grid", descriptor));

    KernelExpansion e = sample_kernel_expansion(kernel_from_params(kv, descriptor), seed, count, lo, hi, 1.0);
    e.weights = e.weights.cwiseAbs();
    const Eigen::MatrixXd K = e.kernel.gram(e.centers);
    e.norm = std::sqrt(std::max(0.0, e.weights.dot(K * e.weights)));

    const Eigen::MatrixXd pts = dense_grid(lo, hi, grid);
    double min_value = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < pts.rows(); ++r) min_value = std::min(min_value, e(pts.row(r).transpose()));
    if (!(min_value > 0.0)) throw NumericalBreakdownError("positive kernel expansion has non-positive grid min");
    e.weights *= eps / min_value;
    e.norm *= eps / min_value;
    if (out_eps) *out_eps = eps;
    return e;
}

std::string kexpmin_descriptor(const Kernel& kernel, std::uint64_t seed, int count,
                               const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, double eps, int grid) {
    std::ostringstream out;
    out << "kexpmin:count=" << count << ":ls="
        << number_list(broadcast_lengthscales(kernel, static_cast<int>(lo.size())))
        << ":scale=" << format_double(kernel.scale()) << ":seed=" << seed << ":lo=" << number_list(lo)
        << ":hi=" << number_list(hi) << ":eps=" << format_double(eps) << ":grid=" << grid;
    return out.str();
}

const bool oracle_schemes_registered = [] {
    register_oracle_scheme("rff", [](const std::string& d) { return make_rff_oracle(d); });
    register_oracle_scheme("kexp", [](const std::string& d) {
        const KernelExpansion e = build_kexp(d);
        return OracleFn([e](const Eigen::VectorXd& s) { return e(s); });
    });
    register_oracle_scheme("kexpmin", [](const std::string& d) {
        const KernelExpansion e = build_kexpmin(d);
        return OracleFn([e](const Eigen::VectorXd& s) { return e(s); });
    });
    return true;
}();

}  // namespace

// ---- problems ----

double Problem::true_objective(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd z = objective.propagate_true(x);
    return z[z.size() - 1];
}

Eigen::VectorXd Problem::true_constraints(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g(constraint_count());
    for (int k = 0; k < constraint_count(); ++k) {
        const Eigen::VectorXd z = constraints[k].propagate_true(x);
        g[k] = z[z.size() - 1];
    }
    return g;
}

void Problem::validate() const {
    objective.validate();
    for (const GreyBoxGraph& g : constraints) {
        g.validate();
        if (g.input_dim != objective.input_dim || g.domain_lower != objective.domain_lower ||
            g.domain_upper != objective.domain_upper) {
            throw DimensionMismatchError("constraint graphs must share the objective's input domain");
        }
    }
}

GroundTruth compute_ground_truth(const Problem& problem, int points_per_axis) {
    const GreyBoxGraph& g = problem.objective;
    if (points_per_axis <= 0) points_per_axis = default_grid_axis_points(g.input_dim);
    const Eigen::MatrixXd grid = dense_grid(g.domain_lower, g.domain_upper, points_per_axis);

    GroundTruth gt;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < grid.rows(); ++r) {
        const Eigen::VectorXd x = grid.row(r).transpose();
        bool feasible = true;
        for (const GreyBoxGraph& c : problem.constraints) {
            const Eigen::VectorXd zc = c.propagate_true(x);
            if (zc[zc.size() - 1] > 0.0) {
                feasible = false;
                break;
            }
        }
        if (!feasible) continue;
        const double f = problem.true_objective(x);
        if (f < best) {
            best = f;
            gt.x_star = x;
            gt.f_star = f;
            gt.feasible_point_exists = true;
        }
    }
    return gt;
}

namespace {

// sup of |w . s + b| over the box, attained at a vertex
double affine_sup(const Eigen::VectorXd& w, double b, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    double high = b, low = b;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        high += std::max(w[i] * lo[i], w[i] * hi[i]);
        low += std::min(w[i] * lo[i], w[i] * hi[i]);
    }
    return std::max(std::abs(high), std::abs(low));
}

Eigen::VectorXd unit_vector(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(dim);
    double norm = 0.0;
    while (norm < 1e-12) {
        for (int i = 0; i < dim; ++i) v[i] = normal(rng);
        norm = v.norm();
    }
    return v / norm;
}

struct BlackNodeConstants {
    double B = 0.0;
    double C = 0.0;
    double L = 0.0;
};

BlackNodeConstants black_constants(const OracleFn& fn, double B, const Eigen::VectorXd& lo,
                                   const Eigen::VectorXd& hi) {
    const int pts = lo.size() <= 2 ? 101 : 41;
    BlackNodeConstants out;
    out.B = B;
    out.C = std::max(B, 1.1 * grid_max_abs(fn, lo, hi, pts));
    out.L = estimate_lipschitz(fn, lo, hi, pts);
    return out;
}

NodeSpec black_node(int id, std::vector<ParentRef> parents, const std::string& oracle_id,
                    const Kernel& gp_kernel, double B, const Eigen::VectorXd& lo,
                    const Eigen::VectorXd& hi) {
    NodeSpec n;
    n.id = id;
    n.is_black = true;
    n.parents = std::move(parents);
    n.oracle_id = oracle_id;
    n.oracle = resolve_oracle(oracle_id);
    n.rkhs_norm_bound = B;
    n.kernel = gp_kernel;
    const BlackNodeConstants c = black_constants(n.oracle, B, lo, hi);
    n.output_bound = c.C;
    n.lipschitz = std::max(c.L, 1e-6);
    return n;
}

NodeSpec white_affine_node(int id, std::vector<ParentRef> parents, const Eigen::VectorXd& w, double b,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    NodeSpec n;
    n.id = id;
    n.is_black = false;
    n.parents = std::move(parents);
    n.expr = make_affine(w, b);
    n.lipschitz = std::max(w.cwiseAbs().maxCoeff(), 1e-12);
    n.output_bound = std::max(affine_sup(w, b, lo, hi), 1e-12);
    return n;
}

Eigen::VectorXd parent_lo(const GreyBoxGraph& g, const std::vector<ParentRef>& parents) {
    Eigen::VectorXd lo(static_cast<Eigen::Index>(parents.size()));
    for (std::size_t p = 0; p < parents.size(); ++p) {
        lo[static_cast<Eigen::Index>(p)] = parents[p].kind == ParentRef::Kind::Input
                                               ? g.domain_lower[parents[p].index]
                                               : -g.nodes[parents[p].index].output_bound;
    }
    return lo;
}

Eigen::VectorXd parent_hi(const GreyBoxGraph& g, const std::vector<ParentRef>& parents) {
    Eigen::VectorXd hi(static_cast<Eigen::Index>(parents.size()));
    for (std::size_t p = 0; p < parents.size(); ++p) {
        hi[static_cast<Eigen::Index>(p)] = parents[p].kind == ParentRef::Kind::Input
                                               ? g.domain_upper[parents[p].index]
                                               : g.nodes[parents[p].index].output_bound;
    }
    return hi;
}

}  // namespace

Problem generate_lp_gp(std::uint64_t seed, const LpGpOptions& options) {
    const int K = options.constraint_count;
    const double ls = 1.0 / std::sqrt(2.0);
    const Kernel h_kernel = Kernel::squared_exponential(Eigen::VectorXd::Constant(2, ls), 0.5);

    Problem problem;
    problem.family = "lp_gp";
    problem.seed = seed;
    problem.name = "lp_gp_seed" + std::to_string(seed);

    for (int attempt = 0; attempt < options.max_rejections; ++attempt) {
        const std::uint64_t base = mix_seed(seed, static_cast<std::uint64_t>(attempt));
        std::mt19937_64 rng = make_rng(base, 0);

        const Eigen::VectorXd c1 = unit_vector(rng, 2);
        const Eigen::VectorXd c2 = unit_vector(rng, 2);
        Eigen::MatrixXd A1(K, 2), A2(K, 2);
        for (int k = 0; k < K; ++k) A1.row(k) = unit_vector(rng, 2).transpose();
        for (int k = 0; k < K; ++k) A2.row(k) = unit_vector(rng, 2).transpose();
        const Eigen::VectorXd b = unit_vector(rng, K);

        GreyBoxGraph objective;
        objective.input_dim = 2;
        objective.domain_lower = Eigen::VectorXd::Constant(2, -2.0);
        objective.domain_upper = Eigen::VectorXd::Constant(2, 2.0);

        const std::vector<ParentRef> x_parents = {ParentRef::input(0), ParentRef::input(1)};
        for (int i = 0; i < 2; ++i) {
            const RffFunction h(h_kernel, mix_seed(base, static_cast<std::uint64_t>(i + 1)),
                                options.feature_count, 2);
            objective.nodes.push_back(black_node(i, x_parents, h.descriptor(), h_kernel, h.weight_norm(),
                                                 objective.domain_lower, objective.domain_upper));
        }
        const std::vector<ParentRef> all_parents = {ParentRef::input(0), ParentRef::input(1),
                                                    ParentRef::node(0), ParentRef::node(1)};
        Eigen::VectorXd w_obj(4);
        w_obj << c1[0], c1[1], c2[0], c2[1];
        objective.nodes.push_back(white_affine_node(2, all_parents, w_obj, 0.0,
                                                    parent_lo(objective, all_parents),
                                                    parent_hi(objective, all_parents)));

        problem.objective = objective;
        problem.constraints.clear();
        for (int k = 0; k < K; ++k) {
            GreyBoxGraph c = objective;
            Eigen::VectorXd w_k(4);
            w_k << A1(k, 0), A1(k, 1), A2(k, 0), A2(k, 1);
            c.nodes[2] = white_affine_node(2, all_parents, w_k, b[k], parent_lo(c, all_parents),
                                           parent_hi(c, all_parents));
            problem.constraints.push_back(std::move(c));
        }

        problem.validate();
        const GroundTruth gt = compute_ground_truth(problem);
        if (gt.feasible_point_exists) {
            problem.ground_truth = gt;
            problem.rejection_count = attempt;
            return problem;
        }
    }
    throw NumericalBreakdownError("lp_gp generation exhausted rejection budget without a feasible instance");
}

Problem generate_section33(Section33Variant variant, std::uint64_t seed) {
    Problem problem;
    problem.seed = seed;

    if (variant == Section33Variant::Additive) {
        problem.family = "additive";
        problem.name = "additive_seed" + std::to_string(seed);
        GreyBoxGraph g;
        g.input_dim = 3;
        g.domain_lower = Eigen::VectorXd::Constant(3, -1.0);
        g.domain_upper = Eigen::VectorXd::Constant(3, 1.0);
        const Kernel kernel = Kernel::squared_exponential(Eigen::VectorXd::Constant(2, 0.6), 1.0);
        const std::vector<std::vector<ParentRef>> parent_sets = {
            {ParentRef::input(0), ParentRef::input(1)},
            {ParentRef::input(1), ParentRef::input(2)},
            {ParentRef::input(0), ParentRef::input(2)},
        };
        for (int i = 0; i < 3; ++i) {
            const Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -1.0);
            const Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 1.0);
            const std::string id = kexp_descriptor(kernel, mix_seed(seed, static_cast<std::uint64_t>(i + 1)),
                                                   10, lo, hi, 1.5);
            g.nodes.push_back(black_node(i, parent_sets[i], id, kernel, 1.5, lo, hi));
        }
        const std::vector<ParentRef> sum_parents = {ParentRef::node(0), ParentRef::node(1), ParentRef::node(2)};
        g.nodes.push_back(white_affine_node(3, sum_parents, Eigen::VectorXd::Ones(3), 0.0,
                                            parent_lo(g, sum_parents), parent_hi(g, sum_parents)));
        problem.objective = g;
    } else if (variant == Section33Variant::SquaredComposition) {
        problem.family = "squared_composition";
        problem.name = "squared_composition_seed" + std::to_string(seed);
        GreyBoxGraph g;
        g.input_dim = 2;
        g.domain_lower = Eigen::VectorXd::Constant(2, -1.0);
        g.domain_upper = Eigen::VectorXd::Constant(2, 1.0);
        const Kernel kernel = Kernel::squared_exponential(Eigen::VectorXd::Constant(2, 0.6), 1.0);
        const std::vector<ParentRef> x_parents = {ParentRef::input(0), ParentRef::input(1)};
        for (int i = 0; i < 2; ++i) {
            const std::string id = kexp_descriptor(kernel, mix_seed(seed, static_cast<std::uint64_t>(i + 1)),
                                                   10, g.domain_lower, g.domain_upper, 1.5);
            g.nodes.push_back(black_node(i, x_parents, id, kernel, 1.5, g.domain_lower, g.domain_upper));
        }
        NodeSpec terminal;
        terminal.id = 2;
        terminal.is_black = false;
        terminal.parents = {ParentRef::node(0), ParentRef::node(1)};
        terminal.expr = make_quadratic(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), 0.0);
        const double c1 = g.nodes[0].output_bound;
        const double c2 = g.nodes[1].output_bound;
        terminal.lipschitz = 2.0 * std::max(c1, c2);
        terminal.output_bound = c1 * c1 + c2 * c2;
        g.nodes.push_back(terminal);
        problem.objective = g;
    } else {
        problem.family = "hybrid_chain";
        problem.name = "hybrid_chain_seed" + std::to_string(seed);
        GreyBoxGraph g;
        g.input_dim = 1;
        g.domain_lower = Eigen::VectorXd::Constant(1, -1.0);
        g.domain_upper = Eigen::VectorXd::Constant(1, 1.0);
        const Kernel k1 = Kernel::squared_exponential(Eigen::VectorXd::Constant(1, 0.4), 1.0);
        const std::string id1 = kexp_descriptor(k1, mix_seed(seed, 1), 10, g.domain_lower, g.domain_upper, 1.5);
        g.nodes.push_back(black_node(0, {ParentRef::input(0)}, id1, k1, 1.5, g.domain_lower, g.domain_upper));

        NodeSpec middle;
        middle.id = 1;
        middle.is_black = false;
        middle.parents = {ParentRef::node(0)};
        middle.expr = make_quadratic(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Constant(1, 3.0), -3.0);
        const double c1 = g.nodes[0].output_bound;
        middle.lipschitz = 2.0 * c1 + 3.0;
        middle.output_bound = c1 * c1 + 3.0 * c1 + 3.0;
        g.nodes.push_back(middle);

        const double c2 = g.nodes[1].output_bound;
        const Eigen::VectorXd lo2 = Eigen::VectorXd::Constant(1, -c2);
        const Eigen::VectorXd hi2 = Eigen::VectorXd::Constant(1, c2);
        const Kernel k3 = Kernel::squared_exponential(Eigen::VectorXd::Constant(1, 0.5 * c2), 1.0);
        const std::string id3 = kexp_descriptor(k3, mix_seed(seed, 3), 10, lo2, hi2, 1.5);
        g.nodes.push_back(black_node(2, {ParentRef::node(1)}, id3, k3, 1.5, lo2, hi2));
        problem.objective = g;
    }

    problem.validate();
    problem.ground_truth = compute_ground_truth(problem);
    return problem;
}

Problem generate_one_layer(std::uint64_t seed, int K) {
    if (K < 0) throw DimensionMismatchError("one_layer needs K >= 0");
    Problem problem;
    problem.family = K == 0 ? "one_layer_unconstrained" : "one_layer";
    problem.seed = seed;
    problem.name = problem.family + "_seed" + std::to_string(seed);

    const Kernel kernel = Kernel::squared_exponential(Eigen::VectorXd::Constant(2, 0.5), 1.0);
    for (int attempt = 0; attempt < 64; ++attempt) {
        const std::uint64_t base = mix_seed(seed, static_cast<std::uint64_t>(attempt));
        GreyBoxGraph g;
        g.input_dim = 2;
        g.domain_lower = Eigen::VectorXd::Constant(2, -1.0);
        g.domain_upper = Eigen::VectorXd::Constant(2, 1.0);
        const std::vector<ParentRef> x_parents = {ParentRef::input(0), ParentRef::input(1)};
        for (int i = 0; i < 2; ++i) {
            const std::string id = kexp_descriptor(kernel, mix_seed(base, static_cast<std::uint64_t>(i + 1)),
                                                   10, g.domain_lower, g.domain_upper, 1.5);
            g.nodes.push_back(black_node(i, x_parents, id, kernel, 1.5, g.domain_lower, g.domain_upper));
        }
        const std::vector<ParentRef> z_parents = {ParentRef::node(0), ParentRef::node(1)};
        Eigen::VectorXd w_f(2);
        w_f << 0.7, 0.7;
        g.nodes.push_back(white_affine_node(2, z_parents, w_f, 0.0, parent_lo(g, z_parents),
                                            parent_hi(g, z_parents)));
        problem.objective = g;

        problem.constraints.clear();
        std::mt19937_64 rng = make_rng(base, 9);
        for (int k = 0; k < K; ++k) {
            GreyBoxGraph c = g;
            const Eigen::VectorXd w_k = unit_vector(rng, 2);
            c.nodes[2] = white_affine_node(2, z_parents, w_k, -0.25, parent_lo(c, z_parents),
                                           parent_hi(c, z_parents));
            problem.constraints.push_back(std::move(c));
        }

        problem.validate();
        const GroundTruth gt = compute_ground_truth(problem);
        if (gt.feasible_point_exists) {
            problem.ground_truth = gt;
            problem.rejection_count = attempt;
            return problem;
        }
    }
    throw NumericalBreakdownError("one_layer generation exhausted rejection budget");
}

Problem generate_infeasible(std::uint64_t seed, double eps) {
    Problem problem;
    problem.family = "infeasible";
    problem.seed = seed;
    problem.name = "infeasible_seed" + std::to_string(seed);

    GreyBoxGraph objective;
    objective.input_dim = 1;
    objective.domain_lower = Eigen::VectorXd::Constant(1, -1.0);
    objective.domain_upper = Eigen::VectorXd::Constant(1, 1.0);
    const Kernel kernel = Kernel::squared_exponential(Eigen::VectorXd::Constant(1, 0.4), 1.0);
    const std::string obj_id = kexp_descriptor(kernel, mix_seed(seed, 1), 10, objective.domain_lower,
                                               objective.domain_upper, 1.5);
    objective.nodes.push_back(black_node(0, {ParentRef::input(0)}, obj_id, kernel, 1.5,
                                         objective.domain_lower, objective.domain_upper));
    problem.objective = objective;

    // Resample draws whose min-eps rescale explodes the norm; a norm cap keeps
    // the detection horizon of the family commensurate with the margin.
    for (int attempt = 0; attempt < 64; ++attempt) {
        GreyBoxGraph constraint = objective;
        const std::string g_id =
            kexpmin_descriptor(kernel, mix_seed(mix_seed(seed, 2), static_cast<std::uint64_t>(attempt)),
                               8, objective.domain_lower, objective.domain_upper, eps, 101);
        const KernelExpansion g_fn = build_kexpmin(g_id);
        if (g_fn.norm > 10.0) continue;
        constraint.nodes[0] = black_node(0, {ParentRef::input(0)}, g_id, kernel, g_fn.norm,
                                         objective.domain_lower, objective.domain_upper);
        problem.constraints.push_back(constraint);
        problem.rejection_count = attempt;
        problem.validate();
        return problem;
    }
    throw NumericalBreakdownError("infeasible generation exhausted rejection budget");
}

Problem generate_problem(const std::string& family, std::uint64_t seed) {
    if (family == "lp_gp") return generate_lp_gp(seed);
    if (family == "additive") return generate_section33(Section33Variant::Additive, seed);
    if (family == "squared_composition") return generate_section33(Section33Variant::SquaredComposition, seed);
    if (family == "hybrid_chain") return generate_section33(Section33Variant::HybridChain, seed);
    if (family == "one_layer") return generate_one_layer(seed, 2);
    if (family == "one_layer_unconstrained") return generate_one_layer(seed, 0);
    if (family == "infeasible") return generate_infeasible(seed);
    throw ConfigParseError("unknown problem family '" + family + "'");
}

// ---- text round-trip ----

std::string problem_to_text(const Problem& problem) {
    std::ostringstream out;
    out << "[problem]\n";
    out << "name = " << problem.name << "\n";
    out << "family = " << problem.family << "\n";
    out << "seed = " << problem.seed << "\n";
    out << "constraint_count = " << problem.constraint_count() << "\n";
    out << "rejections = " << problem.rejection_count << "\n";
    out << "ground_truth = " << (problem.ground_truth ? "true" : "false") << "\n";
    if (problem.ground_truth) {
        out << "x_star = " << number_list(problem.ground_truth->x_star) << "\n";
        out << "f_star = " << format_double(problem.ground_truth->f_star) << "\n";
    }
    out << "\n" << graph_to_text(problem.objective, "objective ");
    for (int k = 0; k < problem.constraint_count(); ++k) {
        out << "\n" << graph_to_text(problem.constraints[k], "constraint " + std::to_string(k + 1) + " ");
    }
    return out.str();
}

Problem problem_from_text(const std::string& text, const std::string& origin) {
    const Config config = Config::parse_string(text, origin);
    const ConfigSection& header = config.require("problem");

    Problem problem;
    problem.name = header.get("name");
    problem.family = header.get("family");
    problem.seed = header.get_uint64("seed");
    problem.rejection_count = header.get_int_or("rejections", 0);
    problem.objective = graph_from_config(config, "objective ");
    const int K = header.get_int("constraint_count");
    for (int k = 0; k < K; ++k) {
        problem.constraints.push_back(graph_from_config(config, "constraint " + std::to_string(k + 1) + " "));
    }
    if (header.get_bool_or("ground_truth", false)) {
        GroundTruth gt;
        const auto xs = header.get_doubles("x_star");
        gt.x_star = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
        gt.f_star = header.get_double("f_star");
        gt.feasible_point_exists = true;
        problem.ground_truth = gt;
    }
    problem.validate();
    return problem;
}

Problem problem_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigParseError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return problem_from_text(buf.str(), path);
}

}  // namespace gbopt
