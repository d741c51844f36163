#pragma once

//! \file pce.hpp
//! \brief Polynomial chaos in probabilists' Hermite polynomials of independent
//! standard Gaussian germs.
//!
//! A PceVector holds the coefficients of a vector-valued random variable
//!   X(xi) = sum_alpha x^(alpha) psi_alpha(xi),   psi_alpha = prod_i He_{alpha_i}(xi_i),
//! one column per multi-index. With this basis E[psi_alpha psi_beta] = alpha! delta_{alpha beta},
//! so means and covariances follow directly from the coefficients.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vpid/csv.hpp"
#include "vpid/errors.hpp"

namespace vpid {

using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& alpha) {
    int d = 0;
    for (int a : alpha) d += a;
    return d;
}

//! alpha! = prod_i alpha_i!, the squared norm E[psi_alpha^2].
inline double factorial_norm(const MultiIndex& alpha) {
    double f = 1.0;
    for (int a : alpha)
        for (int j = 2; j <= a; ++j) f *= j;
    return f;
}

//! Binomial coefficient C(n, k) as a double.
inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return std::round(c);
}

namespace detail {

inline void compositions(int remaining, std::size_t pos, MultiIndex& cur, std::vector<MultiIndex>& out) {
    if (pos + 1 == cur.size()) {
        cur[pos] = remaining;
        out.push_back(cur);
        return;
    }
    for (int a = remaining; a >= 0; --a) {
        cur[pos] = a;
        compositions(remaining - a, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

}  // namespace detail

//! \brief All multi-indices of total degree <= p, graded and descending-lexicographic within a degree
//! \details For m = 2, p = 1: (0,0), (1,0), (0,1).
inline std::vector<MultiIndex> multi_index_set(int m, int p) {
    if (m < 1) throw InvalidArgument("number of germs must be at least 1");
    if (p < 0) throw InvalidArgument("degree must be non-negative");
    std::vector<MultiIndex> out;
    out.reserve(static_cast<std::size_t>(binomial(m + p, p)));
    MultiIndex cur(static_cast<std::size_t>(m), 0);
    for (int d = 0; d <= p; ++d) detail::compositions(d, 0, cur, out);
    return out;
}

//! He_n(x) by the three-term recurrence He_{n+1} = x He_n - n He_{n-1}.
inline double hermite_1d(int n, double x) {
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = x;
    for (int k = 1; k < n; ++k) {
        const double next = x * cur - k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

inline double hermite_eval(const MultiIndex& alpha, std::span<const double> xi) {
    if (xi.size() < alpha.size()) throw InvalidArgument("germ vector shorter than multi-index");
    double v = 1.0;
    for (std::size_t i = 0; i < alpha.size(); ++i)
        if (alpha[i] != 0) v *= hermite_1d(alpha[i], xi[i]);
    return v;
}

//! \brief Coefficients of a dim-valued random variable on a set of Hermite multi-indices
class PceVector {
  public:
    PceVector() = default;

    //! Zero coefficients on the full total-degree set.
    PceVector(int dim, int germs, int degree)
        : germs_(germs), index_set_(multi_index_set(germs, degree)),
          coefficients_(Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(index_set_.size()))) {}

    PceVector(std::vector<MultiIndex> index_set, Eigen::MatrixXd coefficients)
        : index_set_(std::move(index_set)), coefficients_(std::move(coefficients)) {
        if (index_set_.empty()) throw InvalidArgument("empty index set");
        germs_ = static_cast<int>(index_set_.front().size());
        for (const auto& a : index_set_)
            if (static_cast<int>(a.size()) != germs_) throw InvalidArgument("multi-indices of unequal length");
        if (total_degree(index_set_.front()) != 0) throw InvalidArgument("index set must start with the zero index");
        if (coefficients_.cols() != static_cast<Eigen::Index>(index_set_.size()))
            throw InvalidArgument("coefficient columns do not match index set size");
    }

    int dim() const { return static_cast<int>(coefficients_.rows()); }
    int germs() const { return germs_; }
    std::size_t size() const { return index_set_.size(); }

    //! Highest total degree present in the index set.
    int degree() const {
        int d = 0;
        for (const auto& a : index_set_) d = std::max(d, total_degree(a));
        return d;
    }

    const std::vector<MultiIndex>& index_set() const { return index_set_; }
    const Eigen::MatrixXd& coefficients() const { return coefficients_; }
    Eigen::MatrixXd& coefficients() { return coefficients_; }

    bool same_basis(const PceVector& o) const { return germs_ == o.germs_ && index_set_ == o.index_set_; }

  private:
    int germs_ = 0;
    std::vector<MultiIndex> index_set_;
    Eigen::MatrixXd coefficients_;
};

//! \brief Tensor Gauss-Hermite rule for the standard Gaussian measure
struct QuadratureRule {
    Eigen::MatrixXd nodes;  //!< germs x n_nodes
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    std::span<const double> node(std::size_t j) const {
        return {nodes.data() + static_cast<Eigen::Index>(j) * nodes.rows(), static_cast<std::size_t>(nodes.rows())};
    }
};

//! One-dimensional probabilists' Gauss-Hermite rule (Golub-Welsch), nodes ascending.
inline std::pair<std::vector<double>, std::vector<double>> gauss_hermite_1d(int level) {
    if (level < 1) throw InvalidArgument("quadrature level must be at least 1");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(level, level);
    for (int i = 1; i < level; ++i) jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(static_cast<double>(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    std::vector<double> x(static_cast<std::size_t>(level));
    std::vector<double> w(static_cast<std::size_t>(level));
    for (int i = 0; i < level; ++i) {
        x[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        w[static_cast<std::size_t>(i)] = v0 * v0;
    }
    // Enforce the exact symmetry of the rule.
    for (int i = 0; i < level / 2; ++i) {
        const auto a = static_cast<std::size_t>(i);
        const auto b = static_cast<std::size_t>(level - 1 - i);
        const double xs = 0.5 * (x[b] - x[a]);
        const double ws = 0.5 * (w[a] + w[b]);
        x[a] = -xs;
        x[b] = xs;
        w[a] = w[b] = ws;
    }
    if (level % 2 == 1) x[static_cast<std::size_t>(level / 2)] = 0.0;
    double total = 0.0;
    for (double wi : w) total += wi;
    for (double& wi : w) wi /= total;
    return {x, w};
}

//! \brief Full tensor product of the level-point rule in m germs
//! \throws CapExceeded if level^m exceeds cap
inline QuadratureRule gauss_hermite_rule(int m, int level, double cap = 1e6) {
    if (m < 1) throw InvalidArgument("number of germs must be at least 1");
    if (level < 1) throw InvalidArgument("quadrature level must be at least 1");
    if (m * std::log(static_cast<double>(level)) > std::log(cap) + 1e-12)
        throw CapExceeded("tensor rule with " + std::to_string(level) + "^" + std::to_string(m) +
                          " nodes exceeds the node cap");
    const auto [x, w] = gauss_hermite_1d(level);
    std::size_t n = 1;
    for (int i = 0; i < m; ++i) n *= static_cast<std::size_t>(level);

    QuadratureRule rule;
    rule.nodes.resize(m, static_cast<Eigen::Index>(n));
    rule.weights.resize(n);
    std::vector<int> digit(static_cast<std::size_t>(m), 0);
    for (std::size_t j = 0; j < n; ++j) {
        double wj = 1.0;
        for (int i = 0; i < m; ++i) {
            const auto d = static_cast<std::size_t>(digit[static_cast<std::size_t>(i)]);
            rule.nodes(i, static_cast<Eigen::Index>(j)) = x[d];
            wj *= w[d];
        }
        rule.weights[j] = wj;
        // Last germ varies fastest.
        for (int i = m - 1; i >= 0; --i) {
            auto& di = digit[static_cast<std::size_t>(i)];
            if (++di < level) break;
            di = 0;
        }
    }
    return rule;
}

//! \brief Truncated chaos of a lognormal variable exp(mu + s xi) on one germ
//! \details s = sqrt(ln(1 + cov^2)), mu = ln(mean) - s^2 / 2; the He_j coefficient is
//! exp(mu + s^2/2) s^j / j! = mean s^j / j!.
inline PceVector lognormal_pce(double mean, double cov, int germ_index, int degree, int germs) {
    if (!(mean > 0.0)) throw InvalidArgument("lognormal mean must be positive");
    if (cov < 0.0) throw InvalidArgument("coefficient of variation must be non-negative");
    if (germ_index < 0 || germ_index >= germs) throw InvalidArgument("germ index out of range");
    PceVector v(1, germs, degree);
    const double s = std::sqrt(std::log1p(cov * cov));
    const double scale = mean;  // exp(mu + s^2 / 2)
    const auto& idx = v.index_set();
    for (std::size_t a = 0; a < idx.size(); ++a) {
        const int j = idx[a][static_cast<std::size_t>(germ_index)];
        if (total_degree(idx[a]) != j) continue;  // other germs must be zero
        if (j == 0) {
            v.coefficients()(0, static_cast<Eigen::Index>(a)) = mean;
            continue;
        }
        if (s == 0.0) continue;
        v.coefficients()(0, static_cast<Eigen::Index>(a)) = scale * std::pow(s, j) / factorial_norm({j});
    }
    return v;
}

//! Stacks same-basis vectors into one of summed dimension.
inline PceVector stack(const std::vector<PceVector>& parts) {
    if (parts.empty()) throw InvalidArgument("nothing to stack");
    Eigen::Index rows = 0;
    for (const auto& p : parts) {
        if (!p.same_basis(parts.front())) throw IndexMismatch("stacked PCE vectors must share an index set");
        rows += p.dim();
    }
    Eigen::MatrixXd c(rows, static_cast<Eigen::Index>(parts.front().size()));
    Eigen::Index r = 0;
    for (const auto& p : parts) {
        c.middleRows(r, p.dim()) = p.coefficients();
        r += p.dim();
    }
    return {parts.front().index_set(), std::move(c)};
}

inline Eigen::VectorXd pce_mean(const PceVector& v) { return v.coefficients().col(0); }

//! \brief Cov[a, b] = sum_{alpha > 0} alpha! a^(alpha) b^(alpha)^T
//! \throws IndexMismatch if the index sets differ
inline Eigen::MatrixXd pce_cov(const PceVector& a, const PceVector& b) {
    if (!a.same_basis(b)) throw IndexMismatch("covariance needs PCE vectors on the same index set");
    const auto& idx = a.index_set();
    const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXd norms(n);
    for (Eigen::Index k = 0; k < n; ++k) norms(k) = total_degree(idx[static_cast<std::size_t>(k)]) == 0 ? 0.0 : factorial_norm(idx[static_cast<std::size_t>(k)]);
    return a.coefficients() * norms.asDiagonal() * b.coefficients().transpose();
}

namespace detail {

//! Non-zero (germ, exponent) pairs of each multi-index, for fast batch evaluation.
inline std::vector<std::vector<std::pair<int, int>>> sparse_terms(const std::vector<MultiIndex>& idx) {
    std::vector<std::vector<std::pair<int, int>>> out(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t i = 0; i < idx[a].size(); ++i)
            if (idx[a][i] != 0) out[a].emplace_back(static_cast<int>(i), idx[a][i]);
    return out;
}

}  // namespace detail

inline Eigen::VectorXd pce_evaluate(const PceVector& v, std::span<const double> xi) {
    if (static_cast<int>(xi.size()) != v.germs()) throw InvalidArgument("germ vector has wrong length");
    Eigen::VectorXd basis(static_cast<Eigen::Index>(v.size()));
    for (std::size_t a = 0; a < v.size(); ++a) basis(static_cast<Eigen::Index>(a)) = hermite_eval(v.index_set()[a], xi);
    return v.coefficients() * basis;
}

//! Evaluates at every column of xi (germs x N); returns dim x N.
inline Eigen::MatrixXd pce_evaluate_many(const PceVector& v, const Eigen::MatrixXd& xi) {
    if (xi.rows() != v.germs()) throw InvalidArgument("germ matrix has wrong number of rows");
    const auto terms = detail::sparse_terms(v.index_set());
    const int pmax = v.degree();
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(v.size()), xi.cols());
    Eigen::MatrixXd he(v.germs(), pmax + 1);
    for (Eigen::Index j = 0; j < xi.cols(); ++j) {
        for (int i = 0; i < v.germs(); ++i) {
            const double x = xi(i, j);
            he(i, 0) = 1.0;
            if (pmax >= 1) he(i, 1) = x;
            for (int k = 1; k < pmax; ++k) he(i, k + 1) = x * he(i, k) - k * he(i, k - 1);
        }
        for (std::size_t a = 0; a < terms.size(); ++a) {
            double b = 1.0;
            for (const auto& [g, e] : terms[a]) b *= he(g, e);
            basis(static_cast<Eigen::Index>(a), j) = b;
        }
    }
    return v.coefficients() * basis;
}

//! \brief Extends the basis with extra independent germs that enter linearly
//! \details Existing indices are padded with zeros; one degree-1 index per new germ is
//! appended with zero coefficient.
inline PceVector append_linear_germs(const PceVector& v, int extra) {
    if (extra < 0) throw InvalidArgument("negative germ count");
    const auto m = static_cast<std::size_t>(v.germs());
    const auto total = m + static_cast<std::size_t>(extra);
    std::vector<MultiIndex> idx;
    idx.reserve(v.size() + static_cast<std::size_t>(extra));
    for (const auto& a : v.index_set()) {
        MultiIndex b(total, 0);
        std::copy(a.begin(), a.end(), b.begin());
        idx.push_back(std::move(b));
    }
    for (std::size_t i = m; i < total; ++i) {
        MultiIndex b(total, 0);
        b[i] = 1;
        idx.push_back(std::move(b));
    }
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(v.dim(), static_cast<Eigen::Index>(idx.size()));
    c.leftCols(static_cast<Eigen::Index>(v.size())) = v.coefficients();
    return {std::move(idx), std::move(c)};
}

//! Header "alpha_1,...,alpha_m,coef_1,...,coef_dim", one row per multi-index.
inline void write_pce_csv(std::ostream& os, const PceVector& v) {
    std::vector<std::string> header;
    for (int i = 1; i <= v.germs(); ++i) header.push_back("alpha_" + std::to_string(i));
    for (int d = 1; d <= v.dim(); ++d) header.push_back("coef_" + std::to_string(d));
    csv::write_row(os, header);
    for (std::size_t a = 0; a < v.size(); ++a) {
        std::vector<std::string> row;
        for (int e : v.index_set()[a]) row.push_back(std::to_string(e));
        for (int d = 0; d < v.dim(); ++d) row.push_back(csv::format(v.coefficients()(d, static_cast<Eigen::Index>(a))));
        csv::write_row(os, row);
    }
}

//! \throws ConfigError on malformed input or a row count other than C(m+p, p)
inline PceVector read_pce_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("PCE file: missing header");
    const auto header = csv::split(line);
    int m = 0;
    int dim = 0;
    for (const auto& h : header) {
        if (h.rfind("alpha_", 0) == 0) {
            if (dim != 0) throw ConfigError("PCE file: alpha columns must precede coef columns");
            ++m;
        } else if (h.rfind("coef_", 0) == 0) {
            ++dim;
        } else {
            throw ConfigError("PCE file: unexpected column '" + h + "'");
        }
    }
    if (m == 0 || dim == 0) throw ConfigError("PCE file: header needs alpha_ and coef_ columns");

    std::vector<MultiIndex> idx;
    std::vector<std::vector<double>> cols;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto f = csv::split(line);
        if (static_cast<int>(f.size()) != m + dim) throw ConfigError("PCE file: wrong field count in row " + std::to_string(idx.size() + 1));
        MultiIndex a(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            const double e = csv::parse_double(f[static_cast<std::size_t>(i)]);
            if (e < 0.0 || e != std::floor(e)) throw ConfigError("PCE file: exponent must be a non-negative integer");
            a[static_cast<std::size_t>(i)] = static_cast<int>(e);
        }
        idx.push_back(std::move(a));
        std::vector<double> c(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d) c[static_cast<std::size_t>(d)] = csv::parse_double(f[static_cast<std::size_t>(m + d)]);
        cols.push_back(std::move(c));
    }
    int p = 0;
    for (const auto& a : idx) p = std::max(p, total_degree(a));
    if (static_cast<double>(idx.size()) != binomial(m + p, p))
        throw ConfigError("PCE file: " + std::to_string(idx.size()) + " rows, expected C(m+p,p) = " +
                          std::to_string(static_cast<long long>(binomial(m + p, p))));
    if (idx != multi_index_set(m, p)) throw ConfigError("PCE file: multi-indices not in graded-lexicographic order");
    Eigen::MatrixXd coef(dim, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (int d = 0; d < dim; ++d) coef(d, static_cast<Eigen::Index>(a)) = cols[a][static_cast<std::size_t>(d)];
    return {std::move(idx), std::move(coef)};
}

}  // namespace vpid
