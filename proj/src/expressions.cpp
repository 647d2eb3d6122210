#include "gbopt/expressions.hpp"

#include <map>
#include <sstream>

#include "gbopt/config.hpp"
#include "gbopt/errors.hpp"

namespace gbopt {

namespace {

std::map<std::string, Expression>& user_registry() {
    static std::map<std::string, Expression> registry;
    return registry;
}

Eigen::VectorXd parse_vector(const std::string& text) {
    const auto items = split_tokens(text, ',');
    Eigen::VectorXd v(static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) {
        try {
            v[static_cast<Eigen::Index>(i)] = std::stod(items[i]);
        } catch (const std::invalid_argument&) {
            throw ConfigParseError("non-numeric expression parameter '" + items[i] + "'");
        }
    }
    return v;
}

Eigen::MatrixXd parse_matrix(const std::string& text) {
    const auto rows = split_tokens(text, ';');
    if (rows.empty()) throw ConfigParseError("empty matrix in expression descriptor");
    Eigen::MatrixXd Q;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Eigen::VectorXd row = parse_vector(rows[r]);
        if (r == 0) {
            Q.resize(static_cast<Eigen::Index>(rows.size()), row.size());
        } else if (row.size() != Q.cols()) {
            throw ConfigParseError("ragged matrix in expression descriptor");
        }
        Q.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return Q;
}

std::string vector_text(const Eigen::VectorXd& v) {
    std::ostringstream out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out << ',';
        out << format_double(v[i]);
    }
    return out.str();
}

std::string matrix_text(const Eigen::MatrixXd& Q) {
    std::ostringstream out;
    for (Eigen::Index r = 0; r < Q.rows(); ++r) {
        if (r) out << ';';
        out << vector_text(Q.row(r).transpose());
    }
    return out.str();
}

void check_arity(const char* what, const Eigen::VectorXd& s, int arity) {
    if (arity >= 0 && s.size() != arity) {
        throw DimensionMismatchError(std::string(what) + " expression expects arity " + std::to_string(arity) +
                                     ", got " + std::to_string(s.size()));
    }
}

}  // namespace

Expression make_affine(const Eigen::VectorXd& w, double b) {
    Expression e;
    e.descriptor = "affine:w=" + vector_text(w) + ":b=" + format_double(b);
    e.arity = static_cast<int>(w.size());
    e.fn = [w, b, arity = e.arity](const Eigen::VectorXd& s) {
        check_arity("affine", s, arity);
        return w.dot(s) + b;
    };
    return e;
}

Expression make_quadratic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& b, double c) {
    if (Q.rows() != Q.cols() || Q.rows() != b.size()) {
        throw DimensionMismatchError("quadratic expression needs square Q matching b");
    }
    Expression e;
    e.descriptor = "quadratic:q=" + matrix_text(Q) + ":b=" + vector_text(b) + ":c=" + format_double(c);
    e.arity = static_cast<int>(Q.rows());
    e.fn = [Q, b, c, arity = e.arity](const Eigen::VectorXd& s) {
        check_arity("quadratic", s, arity);
        return s.dot(Q * s) + b.dot(s) + c;
    };
    return e;
}

Expression make_product() {
    Expression e;
    e.descriptor = "product";
    e.arity = -1;
    e.fn = [](const Eigen::VectorXd& s) { return s.prod(); };
    return e;
}

Expression make_power(int p) {
    if (p < 1) throw ConfigParseError("power expression needs integer exponent >= 1");
    Expression e;
    e.descriptor = "power:p=" + std::to_string(p);
    e.arity = 1;
    e.fn = [p](const Eigen::VectorXd& s) {
        check_arity("power", s, 1);
        double r = 1.0;
        for (int i = 0; i < p; ++i) r *= s[0];
        return r;
    };
    return e;
}

void register_expression(const std::string& name, int arity,
                         std::function<double(const Eigen::VectorXd&)> fn) {
    Expression e;
    e.descriptor = "user:" + name;
    e.arity = arity;
    e.fn = std::move(fn);
    user_registry()[name] = std::move(e);
}

Expression parse_expression(const std::string& descriptor) {
    const auto parts = split_tokens(descriptor, ':');
    if (parts.empty()) throw ConfigParseError("empty expression descriptor");
    const std::string& name = parts[0];

    if (name == "user") {
        if (parts.size() != 2) throw ConfigParseError("user expression descriptor must be 'user:<name>'");
        auto it = user_registry().find(parts[1]);
        if (it == user_registry().end()) throw ConfigParseError("unknown user expression '" + parts[1] + "'");
        return it->second;
    }

    std::map<std::string, std::string> kv;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string::npos) {
            throw ConfigParseError("malformed expression parameter '" + parts[i] + "' in '" + descriptor + "'");
        }
        kv[parts[i].substr(0, eq)] = parts[i].substr(eq + 1);
    }
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) {
            throw ConfigParseError("expression '" + descriptor + "' is missing parameter '" + key + "'");
        }
        return it->second;
    };

    if (name == "affine") return make_affine(parse_vector(need("w")), std::stod(need("b")));
    if (name == "quadratic") {
        return make_quadratic(parse_matrix(need("q")), parse_vector(need("b")), std::stod(need("c")));
    }
    if (name == "product") return make_product();
    if (name == "power") return make_power(std::stoi(need("p")));
    throw ConfigParseError("unknown expression form '" + name + "'");
}

}  // namespace gbopt
