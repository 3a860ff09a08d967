#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "viscotherm/common.hpp"

namespace viscotherm {

/// Mixed (1,1) tensors are plain n x n matrices, n in {2, 3}.
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace detail {
inline void require_square_small(const Mat& m, const char* what) {
    if (m.rows() != m.cols() || (m.rows() != 2 && m.rows() != 3))
        throw std::invalid_argument(std::string(what) + ": expected a 2x2 or 3x3 matrix");
    if (!m.allFinite())
        throw std::invalid_argument(std::string(what) + ": non-finite entries");
}
}  // namespace detail

/// Positive-definite symmetric metric on a 2- or 3-dimensional tangent space.
class Metric {
  public:
    explicit Metric(Mat g) : g_(std::move(g)) {
        detail::require_square_small(g_, "metric");
        const double scale = g_.cwiseAbs().maxCoeff();
        if ((g_ - g_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale))
            throw std::invalid_argument("metric: not symmetric");
        g_ = 0.5 * (g_ + g_.transpose());  // exact symmetry for downstream algebra
        Eigen::LLT<Mat> llt(g_);
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("metric: not positive definite");
        inv_ = llt.solve(Mat::Identity(g_.rows(), g_.cols()));
        det_ = g_.determinant();
    }

    static Metric euclidean(int n) { return Metric(Mat::Identity(n, n)); }

    int dim() const { return static_cast<int>(g_.rows()); }
    const Mat& components() const { return g_; }
    const Mat& inverse() const { return inv_; }
    double determinant() const { return det_; }

    /// g(x, y) = x^T g y.
    double pair(const Vec& x, const Vec& y) const { return x.dot(g_ * y); }

  private:
    Mat g_;
    Mat inv_;
    double det_ = 0.0;
};

/// Metric adjoint of a mixed tensor: the unique operator with
/// g(D x, y) = g(x, adjoint(D) y), i.e. g^{-1} D^T g. Reduces to the
/// transpose for the Euclidean metric.
inline Mat adjoint(const Mat& delta, const Metric& g) {
    detail::require_square_small(delta, "adjoint");
    if (delta.rows() != g.dim())
        throw std::invalid_argument("adjoint: tensor/metric dimension mismatch");
    return g.inverse() * delta.transpose() * g.components();
}

/// Orientation-compatible complex structure on a 2D metric tangent space:
/// J^2 = -1 and J preserves g. For g = I this is the +90 degree rotation
/// [[0,-1],[1,0]]; in general it is sqrt(det g) * g^{-1} * [[0,-1],[1,0]].
class ComplexStructure {
  public:
    explicit ComplexStructure(Mat j, const Metric& g) : j_(std::move(j)) {
        if (g.dim() != 2 || j_.rows() != 2 || j_.cols() != 2)
            throw std::invalid_argument("complex structure: only defined on 2D spaces");
        const Mat jj = j_ * j_ + Mat::Identity(2, 2);
        if (jj.cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, j_.cwiseAbs().maxCoeff()))
            throw std::invalid_argument("complex structure: J^2 != -I");
        const Mat iso = j_.transpose() * g.components() * j_ - g.components();
        if (iso.cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, g.components().cwiseAbs().maxCoeff()))
            throw std::invalid_argument("complex structure: J is not a g-isometry");
    }

    static ComplexStructure standard() {
        Mat j(2, 2);
        j << 0.0, -1.0, 1.0, 0.0;
        return ComplexStructure(std::move(j), Metric::euclidean(2));
    }

    static ComplexStructure from_metric(const Metric& g) {
        if (g.dim() != 2)
            throw std::invalid_argument("complex structure: metric must be 2D");
        Mat j0(2, 2);
        j0 << 0.0, -1.0, 1.0, 0.0;
        Mat j = std::sqrt(g.determinant()) * g.inverse() * j0;
        return ComplexStructure(std::move(j), g);
    }

    const Mat& components() const { return j_; }

  private:
    Mat j_;
};

/// First and second order trace invariants of a mixed tensor:
/// d1 = tr D, d2 = tr D^2, d3 = tr D D'.
struct TraceInvariants {
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
};

inline TraceInvariants general_invariants(const Mat& delta, const Metric& g) {
    const Mat adj = adjoint(delta, g);
    TraceInvariants out;
    out.d1 = delta.trace();
    out.d2 = (delta * delta).trace();
    out.d3 = (delta * adj).trace();
    return out;
}

/// Generators of the degree <= 2 polynomial invariants of (D, D', J) on a
/// 2D tangent space with compatible complex structure J.
struct KahlerInvariants {
    double t1 = 0.0;  ///< tr D
    double t2 = 0.0;  ///< tr J D
    double t3 = 0.0;  ///< tr D (D + D')
    double t4 = 0.0;  ///< tr D (D - D')
    double t5 = 0.0;  ///< tr J D^2
    double t6 = 0.0;  ///< tr J D' J D
    double t7 = 0.0;  ///< tr (J D)^2
};

inline KahlerInvariants kahler_invariants(const Mat& delta, const Metric& g,
                                          const ComplexStructure& cs) {
    if (g.dim() != 2)
        throw std::invalid_argument("kahler_invariants: dimension must be 2");
    detail::require_square_small(delta, "kahler_invariants");
    if (delta.rows() != 2)
        throw std::invalid_argument("kahler_invariants: tensor must be 2x2");
    const Mat adj = adjoint(delta, g);
    const Mat& J = cs.components();
    KahlerInvariants t;
    t.t1 = delta.trace();
    t.t2 = (J * delta).trace();
    t.t3 = (delta * (delta + adj)).trace();
    t.t4 = (delta * (delta - adj)).trace();
    t.t5 = (J * delta * delta).trace();
    t.t6 = (J * adj * J * delta).trace();
    t.t7 = (J * delta * J * delta).trace();
    return t;
}

/// Sign in the relation t4 = sign * t2^2. Fixed once against the brute-force
/// oracle (symbolic expansion gives t4 = -(b-c)^2 = -t2^2 for the standard
/// orientation); see the verification suite and README.
inline constexpr double kT4RelationSign = -1.0;

/// Residuals of the degree-2 invariant reduction relations. r5..r7 are the
/// relations exactly as they close; r4 uses kT4RelationSign.
struct ReductionReport {
    double r4 = 0.0;  ///< t4 - sign * t2^2
    double r5 = 0.0;  ///< t5 - t1 t2
    double r6 = 0.0;  ///< t6 - (t3/2 - t2^2/2 - t1^2)
    double r7 = 0.0;  ///< t7 - (t3/2 + t2^2/2 - t1^2)
    double scale = 1.0;

    double max_relative() const {
        const double m = std::max(std::max(std::abs(r4), std::abs(r5)),
                                  std::max(std::abs(r6), std::abs(r7)));
        return m / scale;
    }
    bool within(double tol) const { return max_relative() <= tol; }
};

inline ReductionReport verify_reduction_relations(const Mat& delta, const Metric& g,
                                                  const ComplexStructure& cs) {
    const KahlerInvariants t = kahler_invariants(delta, g, cs);
    ReductionReport r;
    r.r4 = t.t4 - kT4RelationSign * t.t2 * t.t2;
    r.r5 = t.t5 - t.t1 * t.t2;
    r.r6 = t.t6 - (0.5 * t.t3 - 0.5 * t.t2 * t.t2 - t.t1 * t.t1);
    r.r7 = t.t7 - (0.5 * t.t3 + 0.5 * t.t2 * t.t2 - t.t1 * t.t1);
    double s = 1.0;
    for (double v : {t.t1, t.t2, t.t3, t.t4, t.t5, t.t6, t.t7}) s = std::max(s, std::abs(v));
    r.scale = s;
    return r;
}

}  // namespace viscotherm
