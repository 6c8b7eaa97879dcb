#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace acoustoplate {

/// Real polynomial in the power basis, c[k] multiplies s^k.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

    const std::vector<double>& coeffs() const { return c_; }
    int degree() const { return c_.empty() ? -1 : static_cast<int>(c_.size()) - 1; }
    double leading() const { return c_.empty() ? 0.0 : c_.back(); }
    double coeff(int k) const { return k < static_cast<int>(c_.size()) ? c_[k] : 0.0; }

    double operator()(double s) const {
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
        return acc;
    }

    Polynomial derivative() const {
        std::vector<double> d;
        for (std::size_t k = 1; k < c_.size(); ++k) d.push_back(static_cast<double>(k) * c_[k]);
        return Polynomial(d);
    }

    /// Antiderivative vanishing at 0.
    Polynomial antiderivative() const {
        std::vector<double> a(c_.size() + 1, 0.0);
        for (std::size_t k = 0; k < c_.size(); ++k) a[k + 1] = c_[k] / static_cast<double>(k + 1);
        return Polynomial(a);
    }

    /// Real roots via companion-matrix eigenvalues, polished by Newton.
    std::vector<double> real_roots() const {
        std::vector<double> roots;
        const int n = degree();
        if (n < 1) return roots;
        if (n == 1) {
            roots.push_back(-c_[0] / c_[1]);
            return roots;
        }
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
        for (int i = 0; i < n; ++i) comp(i, n - 1) = -c_[i] / c_[n];
        Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
        const Polynomial d = derivative();
        double scale = 0.0;
        for (double c : c_) scale = std::max(scale, std::abs(c));
        for (int i = 0; i < n; ++i) {
            const auto z = es.eigenvalues()[i];
            if (std::abs(z.imag()) > 1e-7 * std::max(1.0, std::abs(z))) continue;
            double r = z.real();
            for (int it = 0; it < 20; ++it) {
                const double dv = d(r);
                if (dv == 0.0) break;
                const double step = (*this)(r) / dv;
                r -= step;
                if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(r))) break;
            }
            roots.push_back(r);
        }
        std::sort(roots.begin(), roots.end());
        std::vector<double> unique;
        for (double r : roots)
            if (unique.empty() || std::abs(r - unique.back()) > 1e-9 * std::max(1.0, std::abs(r))) unique.push_back(r);
        return unique;
    }

    /// Global minimum over the real line: {value, location}. Value is -inf when unbounded below.
    std::pair<double, double> global_min() const {
        if (degree() <= 0) return {(*this)(0.0), 0.0};
        if (degree() % 2 == 1 || leading() < 0.0) return {-std::numeric_limits<double>::infinity(), 0.0};
        double best = (*this)(0.0), where = 0.0;
        for (double r : derivative().real_roots()) {
            const double v = (*this)(r);
            if (v < best) {
                best = v;
                where = r;
            }
        }
        return {best, where};
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
    }

    std::vector<double> c_;
};

} // namespace acoustoplate
