#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "y00lab/errors.hpp"
#include "y00lab/rng.hpp"

namespace y00lab::qdetect {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

// ---------------------------------------------------------------------------
// truncated-Fock states

/// Cutoff rule guaranteeing sub-1e-12 truncation error with ample margin.
inline unsigned auto_cutoff(double abs_alpha) {
    double a2 = abs_alpha * abs_alpha;
    return static_cast<unsigned>(std::ceil(a2 + 10.0 * std::sqrt(a2 + 1.0) + 20.0));
}

/// Coherent state |alpha> in the number basis, truncated at n_max.
/// n_max < 0 selects the cutoff rule; an explicit cutoff is accepted only
/// if the truncated tail stays below 1e-12.
inline Vec coherent_fock(Complex alpha, int n_max = -1) {
    unsigned n = n_max < 0 ? auto_cutoff(std::abs(alpha)) : static_cast<unsigned>(n_max);
    Vec v(n + 1);
    Complex c = std::exp(-0.5 * std::norm(alpha));
    v(0) = c;
    for (unsigned k = 1; k <= n; ++k) {
        c *= alpha / std::sqrt(static_cast<double>(k));
        v(k) = c;
    }
    double tail = std::abs(1.0 - v.squaredNorm());
    if (tail > 1e-12)
        throw config_error("coherent_fock: cutoff too small, truncation error " +
                           std::to_string(tail));
    return v;
}

/// <b|a> = exp(-(|a|^2 + |b|^2)/2 + conj(b) a).
inline Complex coherent_overlap(Complex a, Complex b) {
    return std::exp(-0.5 * (std::norm(a) + std::norm(b)) + std::conj(b) * a);
}

inline Vec tensor(const Vec& a, const Vec& b) {
    Vec out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

inline Vec tensor(const std::vector<Vec>& factors) {
    if (factors.empty()) throw config_error("tensor: no factors");
    Vec out = factors[0];
    for (std::size_t i = 1; i < factors.size(); ++i) out = tensor(out, factors[i]);
    return out;
}

// ---------------------------------------------------------------------------
// ensembles and measurements

struct Hypothesis {
    std::string label;
    double prior = 0.0;
    Vec state;
};

struct PureStateEnsemble {
    std::vector<Hypothesis> hyps;

    std::size_t size() const { return hyps.size(); }
    Eigen::Index dim() const { return hyps.empty() ? 0 : hyps[0].state.size(); }

    void validate() const {
        if (hyps.empty()) throw config_error("ensemble: empty");
        double s = 0.0;
        for (const auto& h : hyps) {
            s += h.prior;
            if (h.prior < 0.0) throw config_error("ensemble: negative prior");
            if (h.state.size() != dim()) throw config_error("ensemble: dimension mismatch");
            if (std::abs(h.state.squaredNorm() - 1.0) > 1e-10)
                throw config_error("ensemble: state not normalized");
        }
        if (std::abs(s - 1.0) > 1e-10) throw config_error("ensemble: priors do not sum to 1");
    }
};

/// Coherent-signal ensemble: one tensor-product state per key, at most
/// three slots, shared cutoff.
inline PureStateEnsemble coherent_ensemble(const std::vector<double>& priors,
                                           const std::vector<std::vector<Complex>>& alphas,
                                           int n_max = -1) {
    if (priors.size() != alphas.size() || priors.empty())
        throw config_error("coherent_ensemble: shape mismatch");
    const std::size_t slots = alphas[0].size();
    if (slots == 0 || slots > 3)
        throw infeasible_error("coherent_ensemble: 1..3 slots supported exactly");
    int cutoff = n_max;
    if (cutoff < 0) {
        double amax = 0.0;
        for (const auto& row : alphas)
            for (auto a : row) amax = std::max(amax, std::abs(a));
        cutoff = static_cast<int>(auto_cutoff(amax));
    }
    PureStateEnsemble e;
    for (std::size_t r = 0; r < priors.size(); ++r) {
        if (alphas[r].size() != slots) throw config_error("coherent_ensemble: ragged slots");
        std::vector<Vec> f;
        f.reserve(slots);
        for (auto a : alphas[r]) f.push_back(coherent_fock(a, cutoff));
        e.hyps.push_back({"r" + std::to_string(r), priors[r], tensor(f)});
    }
    e.validate();
    return e;
}

struct MeasurementSet {
    std::vector<Mat> ops;
};

inline Mat hermitian_part(const Mat& a) { return 0.5 * (a + a.adjoint()); }

inline double operator_norm(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

/// Projector onto the span of the ensemble states.
inline Mat support_projector(const PureStateEnsemble& e) {
    Mat v(e.dim(), static_cast<Eigen::Index>(e.size()));
    for (std::size_t r = 0; r < e.size(); ++r) v.col(static_cast<Eigen::Index>(r)) = e.hyps[r].state;
    Eigen::HouseholderQR<Mat> qr(v);
    Mat q = qr.householderQ() * Mat::Identity(e.dim(), v.cols());
    // columns beyond the numerical rank contribute negligibly to Q Q^dag on
    // the span; rank-trim via the R diagonal
    Mat rmat = qr.matrixQR().topRows(v.cols()).triangularView<Eigen::Upper>();
    double rmax = 0.0;
    for (Eigen::Index i = 0; i < rmat.rows(); ++i) rmax = std::max(rmax, std::abs(rmat(i, i)));
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < rmat.rows(); ++i)
        if (std::abs(rmat(i, i)) > rmax * 1e-12) ++rank;
    Mat qr_cols = q.leftCols(std::max<Eigen::Index>(rank, 1));
    return qr_cols * qr_cols.adjoint();
}

/// || P (sum M - I) P || with P the ensemble-support projector.
inline double completeness_residual(const MeasurementSet& m, const PureStateEnsemble& e) {
    Mat sum = Mat::Zero(e.dim(), e.dim());
    for (const auto& op : m.ops) sum += op;
    Mat p = support_projector(e);
    return operator_norm(p * (sum - Mat::Identity(e.dim(), e.dim())) * p);
}

inline double min_eigenvalue(const Mat& hermitian) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(hermitian));
    return es.eigenvalues().minCoeff();
}

inline double positivity_floor(const MeasurementSet& m) {
    double mn = 0.0;
    for (const auto& op : m.ops) mn = std::min(mn, min_eigenvalue(op));
    return mn;
}

// ---------------------------------------------------------------------------
// square-root measurement and Helstrom

namespace detail {

/// Eigendecomposition-based f(A) for Hermitian A with spectral floor.
inline Mat hermitian_apply(const Mat& a, const std::function<double(double)>& f,
                           double rel_floor, bool* dropped = nullptr) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(a));
    const auto& vals = es.eigenvalues();
    double vmax = vals.cwiseAbs().maxCoeff();
    Vec d(vals.size());
    if (dropped) *dropped = false;
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        if (vals(i) <= vmax * rel_floor) {
            d(i) = 0.0;
            if (dropped) *dropped = true;
        } else {
            d(i) = f(vals(i));
        }
    }
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace detail

struct SrmResult {
    MeasurementSet measurement;
    std::vector<Vec> vectors;      // rank-one measurement vectors (unnormalized)
    double success = 0.0;
    bool support_restricted = false;  // ensemble operator was singular; completeness
                                      // holds on the support only
};

/// Square-root measurement for a pure-state ensemble:
///   M(r) = S^{-1/2} Pr(r)|psi_r><psi_r| S^{-1/2},  S = sum Pr(r)|psi_r><psi_r|.
inline SrmResult srm(const PureStateEnsemble& e) {
    e.validate();
    Mat s = Mat::Zero(e.dim(), e.dim());
    for (const auto& h : e.hyps) s += h.prior * (h.state * h.state.adjoint());
    bool dropped = false;
    Mat inv_sqrt = detail::hermitian_apply(
        s, [](double v) { return 1.0 / std::sqrt(v); }, 1e-13, &dropped);

    SrmResult out;
    out.support_restricted = dropped;
    out.vectors.reserve(e.size());
    for (const auto& h : e.hyps) {
        Vec w = std::sqrt(h.prior) * (inv_sqrt * h.state);
        out.vectors.push_back(w);
        out.measurement.ops.push_back(w * w.adjoint());
        out.success += h.prior * std::norm(w.dot(h.state));
    }
    return out;
}

/// Optimal binary discrimination: 1/2 + ||p0 rho0 - p1 rho1||_1 / 2.
inline double helstrom_binary(const Mat& rho0, const Mat& rho1, double p0) {
    if (p0 < 0.0 || p0 > 1.0) throw config_error("helstrom: p0 out of range");
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(p0 * rho0 - (1.0 - p0) * rho1));
    return 0.5 + 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double helstrom_binary_pure(const Vec& psi0, const Vec& psi1, double p0) {
    return helstrom_binary(psi0 * psi0.adjoint(), psi1 * psi1.adjoint(), p0);
}

// ---------------------------------------------------------------------------
// optimality diagnostics

struct LagrangeReport {
    Mat gamma;
    double success = 0.0;          // -tr Gamma
    double hermiticity_gap = 0.0;  // ||sum M W - sum W M||
    double stationarity = 0.0;     // max_r ||(W_r - G) M_r|| , ||M_r (W_r - G)||
    double pairwise = 0.0;         // max_{r!=r'} ||M_r (W_r' - W_r) M_r'||
    double min_gap_eigenvalue = 0.0;  // min_r lambda_min(W_r - G)
};

/// Residuals of the stationarity and positivity conditions for a candidate
/// measurement, with risk operators W(r) = -Pr(r) rho(r).
inline LagrangeReport optimality_residuals(const PureStateEnsemble& e, const MeasurementSet& m) {
    e.validate();
    if (m.ops.size() != e.size()) throw config_error("residuals: measurement count mismatch");
    const Eigen::Index d = e.dim();
    std::vector<Mat> w(e.size());
    for (std::size_t r = 0; r < e.size(); ++r)
        w[r] = -e.hyps[r].prior * (e.hyps[r].state * e.hyps[r].state.adjoint());

    Mat gamma_left = Mat::Zero(d, d), gamma_right = Mat::Zero(d, d);
    for (std::size_t r = 0; r < e.size(); ++r) {
        gamma_left += m.ops[r] * w[r];
        gamma_right += w[r] * m.ops[r];
    }
    LagrangeReport rep;
    rep.hermiticity_gap = operator_norm(gamma_left - gamma_right);
    rep.gamma = hermitian_part(gamma_left);
    rep.success = -rep.gamma.trace().real();

    rep.min_gap_eigenvalue = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < e.size(); ++r) {
        Mat gap = w[r] - rep.gamma;
        rep.stationarity = std::max({rep.stationarity, operator_norm(gap * m.ops[r]),
                                     operator_norm(m.ops[r] * gap)});
        rep.min_gap_eigenvalue = std::min(rep.min_gap_eigenvalue, min_eigenvalue(gap));
        for (std::size_t q = 0; q < e.size(); ++q) {
            if (q == r) continue;
            rep.pairwise =
                std::max(rep.pairwise, operator_norm(m.ops[r] * (w[q] - w[r]) * m.ops[q]));
        }
    }
    return rep;
}

/// Fixed-point refinement of a measurement toward the stationarity
/// conditions; the square-root measurement is the usual starting point.
inline MeasurementSet fixed_point_refine(const PureStateEnsemble& e, MeasurementSet m,
                                         double tol = 1e-8, unsigned max_iters = 10000) {
    e.validate();
    const Eigen::Index d = e.dim();
    for (unsigned it = 0; it < max_iters; ++it) {
        if (optimality_residuals(e, m).stationarity <= tol) break;
        std::vector<Mat> a(e.size());
        Mat lambda = Mat::Zero(d, d);
        for (std::size_t r = 0; r < e.size(); ++r) {
            Mat rr = e.hyps[r].prior * (e.hyps[r].state * e.hyps[r].state.adjoint());
            a[r] = rr * m.ops[r] * rr;
            lambda += a[r];
        }
        Mat inv_sqrt = detail::hermitian_apply(
            lambda, [](double v) { return 1.0 / std::sqrt(v); }, 1e-13);
        for (std::size_t r = 0; r < e.size(); ++r) m.ops[r] = inv_sqrt * a[r] * inv_sqrt;
    }
    return m;
}

// ---------------------------------------------------------------------------
// Cauchy-Schwarz bound

struct CsBoundReport {
    double bound = 0.0;      // sum a^2 / sum a, a_r = |<psi_r|w_r>|^2
    double achieved = 0.0;   // sum Pr(r) a_r
    double eq_prior_gap = 0.0;  // max_r |Pr(r) - a_r / sum a|
};

/// Success bound for rank-one measurements from the Cauchy-Schwarz pairing
/// of priors with overlaps. Strictly below one whenever any overlap is.
inline CsBoundReport cs_bound(const PureStateEnsemble& e, const SrmResult& srm_result) {
    e.validate();
    if (srm_result.vectors.size() != e.size())
        throw config_error("cs_bound: measurement mismatch");
    std::vector<double> a(e.size());
    double sum_a = 0.0;
    CsBoundReport rep;
    for (std::size_t r = 0; r < e.size(); ++r) {
        a[r] = std::norm(srm_result.vectors[r].dot(e.hyps[r].state));
        sum_a += a[r];
        rep.achieved += e.hyps[r].prior * a[r];
    }
    double sum_a2 = 0.0;
    for (double v : a) sum_a2 += v * v;
    rep.bound = sum_a2 / sum_a;
    for (std::size_t r = 0; r < e.size(); ++r)
        rep.eq_prior_gap = std::max(rep.eq_prior_gap, std::abs(e.hyps[r].prior - a[r] / sum_a));
    return rep;
}

// ---------------------------------------------------------------------------
// TPCP channels

struct KrausChannel {
    std::vector<Mat> ops;

    void validate(double tol = 1e-10) const {
        if (ops.empty()) throw config_error("channel: no Kraus operators");
        const Eigen::Index d = ops[0].cols();
        Mat sum = Mat::Zero(d, d);
        for (const auto& k : ops) {
            if (k.cols() != d) throw config_error("channel: ragged Kraus operators");
            sum += k.adjoint() * k;
        }
        if (operator_norm(sum - Mat::Identity(d, d)) > tol)
            throw config_error("channel: Kraus set is not trace preserving");
    }

    Mat apply(const Mat& rho) const {
        Mat out = Mat::Zero(ops[0].rows(), ops[0].rows());
        for (const auto& k : ops) out += k * rho * k.adjoint();
        return out;
    }
};

/// Haar-random unitary on dim x ancilla followed by tracing the ancilla out,
/// presented as Kraus operators K_i = (I (x) <i|) U (I (x) |0>).
inline KrausChannel random_channel(Eigen::Index dim, Eigen::Index ancilla, RandomStream& rs) {
    const Eigen::Index n = dim * ancilla;
    Mat g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            auto z = rs.next_gaussian_pair();
            g(i, j) = Complex(z.real(), z.imag());
        }
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    // fix the phase ambiguity so the distribution is Haar
    for (Eigen::Index i = 0; i < n; ++i) {
        Complex d = r(i, i);
        q.col(i) *= d / std::abs(d);
    }
    KrausChannel ch;
    for (Eigen::Index i = 0; i < ancilla; ++i) {
        Mat k(dim, dim);
        for (Eigen::Index a = 0; a < dim; ++a)
            for (Eigen::Index b = 0; b < dim; ++b) k(a, b) = q(a * ancilla + i, b * ancilla + 0);
        ch.ops.push_back(k);
    }
    ch.validate(1e-9);
    return ch;
}

struct DpiReport {
    double before = 0.0;
    double after = 0.0;
    bool violated = false;
};

/// Binary discrimination before and after a local channel. Physical maps
/// never help; any measured gain beyond tolerance is flagged.
inline DpiReport dpi_check_binary(const Mat& rho0, const Mat& rho1, double p0,
                                  const KrausChannel& ch, double tol = 1e-9) {
    ch.validate();
    DpiReport rep;
    rep.before = helstrom_binary(rho0, rho1, p0);
    rep.after = helstrom_binary(ch.apply(rho0), ch.apply(rho1), p0);
    rep.violated = rep.after > rep.before + tol;
    return rep;
}

// ---------------------------------------------------------------------------
// mixed-state ensembles (randomized signals)

struct MixedEnsemble {
    std::vector<double> priors;
    std::vector<Mat> states;

    void validate() const {
        if (priors.empty() || priors.size() != states.size())
            throw config_error("mixed ensemble: shape mismatch");
        double s = 0.0;
        for (double p : priors) s += p;
        if (std::abs(s - 1.0) > 1e-9)
            throw config_error("mixed ensemble: priors do not sum to 1");
        for (const auto& m : states)
            if (std::abs(m.trace().real() - 1.0) > 1e-9)
                throw config_error("mixed ensemble: state trace != 1");
    }

    static MixedEnsemble from_components(const std::vector<double>& priors,
                                         const std::vector<std::vector<Vec>>& comps,
                                         const std::vector<std::vector<double>>& weights) {
        MixedEnsemble e;
        e.priors = priors;
        for (std::size_t r = 0; r < comps.size(); ++r) {
            Mat rho = Mat::Zero(comps[r][0].size(), comps[r][0].size());
            for (std::size_t d = 0; d < comps[r].size(); ++d)
                rho += weights[r][d] * (comps[r][d] * comps[r][d].adjoint());
            e.states.push_back(rho);
        }
        e.validate();
        return e;
    }
};

/// Success of a given measurement on a mixed-state ensemble.
inline double mixed_ensemble_success(const MixedEnsemble& e, const MeasurementSet& m) {
    e.validate();
    if (m.ops.size() != e.priors.size()) throw config_error("mixed success: shape mismatch");
    double s = 0.0;
    for (std::size_t r = 0; r < e.priors.size(); ++r)
        s += e.priors[r] * (m.ops[r] * e.states[r]).trace().real();
    return s;
}

/// Square-root measurement generalized to mixed states.
inline MeasurementSet mixed_srm(const MixedEnsemble& e) {
    e.validate();
    const Eigen::Index d = e.states[0].rows();
    Mat s = Mat::Zero(d, d);
    for (std::size_t r = 0; r < e.priors.size(); ++r) s += e.priors[r] * e.states[r];
    Mat inv_sqrt = detail::hermitian_apply(
        s, [](double v) { return 1.0 / std::sqrt(v); }, 1e-13);
    MeasurementSet m;
    for (std::size_t r = 0; r < e.priors.size(); ++r)
        m.ops.push_back(inv_sqrt * (e.priors[r] * e.states[r]) * inv_sqrt);
    return m;
}

/// Best available success: exact Helstrom for binary ensembles, square-root
/// measurement otherwise.
inline double best_success(const MixedEnsemble& e) {
    e.validate();
    if (e.priors.size() == 2)
        return helstrom_binary(e.states[0], e.states[1], e.priors[0]);
    return mixed_ensemble_success(e, mixed_srm(e));
}

// ---------------------------------------------------------------------------
// heterodyne region operators

/// POVM element of an angular sector [lo, hi] of the heterodyne outcome
/// plane, in the truncated number basis:
///   <m|Pi|n> = (1/pi) * Gamma((m+n)/2 + 1)/2 / sqrt(m! n!) * int e^{i(m-n)t} dt.
/// Outcomes here live in natural heterodyne units, where a coherent state
/// |b> lands with per-quadrature variance 1/2 around b. The channel module's
/// outcome convention carries one extra vacuum unit (variance 1), so a
/// channel-side mean of a corresponds to a Fock-side amplitude a / sqrt(2):
/// angular statistics agree because sectors only see the ratio mean/sigma.
inline Mat sector_povm(unsigned n_max, double lo, double hi) {
    Mat pi_op(n_max + 1, n_max + 1);
    for (unsigned m = 0; m <= n_max; ++m) {
        for (unsigned n = 0; n <= n_max; ++n) {
            double radial = 0.5 * std::exp(std::lgamma(0.5 * (m + n) + 1.0) -
                                           0.5 * (std::lgamma(m + 1.0) + std::lgamma(n + 1.0)));
            Complex angular;
            int k = static_cast<int>(m) - static_cast<int>(n);
            if (k == 0) {
                angular = hi - lo;
            } else {
                Complex ik(0.0, static_cast<double>(k));
                angular = (std::exp(ik * hi) - std::exp(ik * lo)) / ik;
            }
            pi_op(m, n) = radial * angular / M_PI;
        }
    }
    return pi_op;
}

} // namespace y00lab::qdetect
