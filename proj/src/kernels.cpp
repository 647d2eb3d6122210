#include "gbopt/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "gbopt/config.hpp"
#include "gbopt/errors.hpp"

namespace gbopt {

namespace {

void check_scale(double scale) {
    if (!(scale > 0.0) || scale > 1.0 + 1e-12) {
        throw UnsupportedKernelError("kernel scale must lie in (0, 1], got " + format_double(scale));
    }
}

void check_lengthscales(const Eigen::VectorXd& ls) {
    if (ls.size() == 0) throw UnsupportedKernelError("kernel needs at least one lengthscale");
    for (Eigen::Index i = 0; i < ls.size(); ++i) {
        if (!(ls[i] > 0.0)) throw UnsupportedKernelError("kernel lengthscales must be positive");
    }
}

}  // namespace

Kernel Kernel::squared_exponential(const Eigen::VectorXd& lengthscales, double scale) {
    check_scale(scale);
    check_lengthscales(lengthscales);
    Kernel k;
    k.family_ = Family::SquaredExponential;
    k.scale_ = scale;
    k.lengthscales_ = lengthscales;
    return k;
}

Kernel Kernel::squared_exponential(double lengthscale, double scale) {
    return squared_exponential(Eigen::VectorXd::Constant(1, lengthscale), scale);
}

Kernel Kernel::matern(double nu, const Eigen::VectorXd& lengthscales, double scale) {
    check_scale(scale);
    check_lengthscales(lengthscales);
    Kernel k;
    if (nu == 0.5) {
        k.family_ = Family::Matern12;
    } else if (nu == 1.5) {
        k.family_ = Family::Matern32;
    } else if (nu == 2.5) {
        k.family_ = Family::Matern52;
    } else {
        throw UnsupportedKernelError("matern nu must be 0.5, 1.5, or 2.5");
    }
    k.scale_ = scale;
    k.lengthscales_ = lengthscales;
    return k;
}

Kernel Kernel::matern(double nu, double lengthscale, double scale) {
    return matern(nu, Eigen::VectorXd::Constant(1, lengthscale), scale);
}

Kernel Kernel::linear(double radius, double scale) {
    check_scale(scale);
    if (!(radius > 0.0)) throw UnsupportedKernelError("linear kernel radius must be positive");
    Kernel k;
    k.family_ = Family::Linear;
    k.scale_ = scale;
    k.radius_ = radius;
    return k;
}

Eigen::VectorXd Kernel::scaled_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    if (a.size() != b.size()) {
        throw DimensionMismatchError("kernel arguments differ in dimension");
    }
    Eigen::VectorXd d = a - b;
    if (lengthscales_.size() == 1) {
        d /= lengthscales_[0];
    } else {
        if (lengthscales_.size() != d.size()) {
            throw DimensionMismatchError("kernel lengthscale vector does not match input dimension");
        }
        d = d.cwiseQuotient(lengthscales_);
    }
    return d;
}

double Kernel::operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    switch (family_) {
        case Family::SquaredExponential: {
            const double r2 = scaled_diff(a, b).squaredNorm();
            return scale_ * std::exp(-0.5 * r2);
        }
        case Family::Matern12: {
            const double r = scaled_diff(a, b).norm();
            return scale_ * std::exp(-r);
        }
        case Family::Matern32: {
            const double r = std::sqrt(3.0) * scaled_diff(a, b).norm();
            return scale_ * (1.0 + r) * std::exp(-r);
        }
        case Family::Matern52: {
            const double r = std::sqrt(5.0) * scaled_diff(a, b).norm();
            return scale_ * (1.0 + r + r * r / 3.0) * std::exp(-r);
        }
        case Family::Linear: {
            if (a.size() != b.size()) throw DimensionMismatchError("kernel arguments differ in dimension");
            return scale_ * a.dot(b) / (radius_ * radius_);
        }
    }
    throw UnsupportedKernelError("unknown kernel family");
}

Eigen::MatrixXd Kernel::gram(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const {
    Eigen::MatrixXd K(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            K(i, j) = (*this)(A.row(i).transpose(), B.row(j).transpose());
        }
    }
    return K;
}

Eigen::MatrixXd Kernel::gram(const Eigen::MatrixXd& A) const {
    Eigen::MatrixXd K(A.rows(), A.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            K(i, j) = (*this)(A.row(i).transpose(), A.row(j).transpose());
            K(j, i) = K(i, j);
        }
    }
    return K;
}

std::string Kernel::to_string() const {
    std::ostringstream out;
    switch (family_) {
        case Family::SquaredExponential: out << "se"; break;
        case Family::Matern12: out << "matern12"; break;
        case Family::Matern32: out << "matern32"; break;
        case Family::Matern52: out << "matern52"; break;
        case Family::Linear: out << "linear"; break;
    }
    if (family_ == Family::Linear) {
        out << ":radius=" << format_double(radius_);
    } else {
        out << ":ls=";
        for (Eigen::Index i = 0; i < lengthscales_.size(); ++i) {
            if (i) out << ',';
            out << format_double(lengthscales_[i]);
        }
    }
    out << ":scale=" << format_double(scale_);
    return out.str();
}

Kernel Kernel::parse(const std::string& text) {
    const auto parts = split_tokens(text, ':');
    if (parts.empty()) throw UnsupportedKernelError("empty kernel descriptor");
    const std::string& name = parts[0];

    double scale = 1.0;
    double radius = 0.0;
    Eigen::VectorXd ls;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string::npos) {
            throw UnsupportedKernelError("malformed kernel parameter '" + parts[i] + "' in '" + text + "'");
        }
        const std::string key = parts[i].substr(0, eq);
        const std::string value = parts[i].substr(eq + 1);
        try {
            if (key == "scale") {
                scale = std::stod(value);
            } else if (key == "radius") {
                radius = std::stod(value);
            } else if (key == "ls") {
                const auto items = split_tokens(value, ',');
                ls.resize(static_cast<Eigen::Index>(items.size()));
                for (std::size_t j = 0; j < items.size(); ++j) ls[static_cast<Eigen::Index>(j)] = std::stod(items[j]);
            } else {
                throw UnsupportedKernelError("unknown kernel parameter '" + key + "' in '" + text + "'");
            }
        } catch (const std::invalid_argument&) {
            throw UnsupportedKernelError("non-numeric kernel parameter '" + parts[i] + "' in '" + text + "'");
        }
    }

    if (name == "se") {
        if (ls.size() == 0) ls = Eigen::VectorXd::Constant(1, 1.0);
        return squared_exponential(ls, scale);
    }
    if (name == "matern12" || name == "matern32" || name == "matern52") {
        if (ls.size() == 0) ls = Eigen::VectorXd::Constant(1, 1.0);
        const double nu = name == "matern12" ? 0.5 : name == "matern32" ? 1.5 : 2.5;
        return matern(nu, ls, scale);
    }
    if (name == "linear") {
        if (!(radius > 0.0)) throw UnsupportedKernelError("linear kernel requires radius=... in '" + text + "'");
        return linear(radius, scale);
    }
    throw UnsupportedKernelError("unknown kernel family '" + name + "'");
}

}  // namespace gbopt
