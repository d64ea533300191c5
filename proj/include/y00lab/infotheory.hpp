#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "y00lab/errors.hpp"

namespace y00lab::infotheory {

namespace detail {

/// Neumaier compensated sum; the entropy identities here are asserted to
/// 1e-12, which plain accumulation does not reliably deliver.
class CompensatedSum {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0, comp_ = 0.0;
};

} // namespace detail

/// Exact finite joint distribution over named variables. Everything here is
/// enumeration; sizes beyond the cap are refused, never sampled.
class JointDist {
public:
    static constexpr std::size_t kMaxEntries = 1ull << 20;

    JointDist(std::vector<std::string> names, std::vector<std::uint32_t> sizes,
              std::vector<double> probs)
        : names_(std::move(names)), sizes_(std::move(sizes)), p_(std::move(probs)) {
        if (names_.size() != sizes_.size() || names_.empty())
            throw config_error("joint dist: shape mismatch");
        std::size_t total = 1;
        for (auto s : sizes_) {
            if (s == 0) throw config_error("joint dist: empty alphabet");
            if (total > kMaxEntries / s)
                throw infeasible_error("joint dist: table exceeds the exactness cap");
            total *= s;
        }
        if (p_.size() != total) throw config_error("joint dist: table size mismatch");
        detail::CompensatedSum cs;
        for (double v : p_) {
            if (v < 0.0) throw config_error("joint dist: negative probability");
            cs.add(v);
        }
        if (std::abs(cs.value() - 1.0) > 1e-12)
            throw config_error("joint dist: probabilities do not sum to 1");
    }

    std::size_t num_vars() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<std::uint32_t>& sizes() const { return sizes_; }
    const std::vector<double>& table() const { return p_; }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return i;
        throw config_error("joint dist: unknown variable '" + name + "'");
    }

    std::vector<std::uint32_t> decode(std::size_t flat) const {
        std::vector<std::uint32_t> v(names_.size());
        for (std::size_t i = names_.size(); i-- > 0;) {
            v[i] = static_cast<std::uint32_t>(flat % sizes_[i]);
            flat /= sizes_[i];
        }
        return v;
    }

    /// Marginal over a subset of variables (order given by `keep`).
    JointDist marginal(const std::vector<std::string>& keep) const {
        std::vector<std::size_t> idx;
        std::vector<std::uint32_t> msizes;
        for (const auto& n : keep) {
            idx.push_back(index_of(n));
            msizes.push_back(sizes_[idx.back()]);
        }
        std::size_t total = 1;
        for (auto s : msizes) total *= s;
        std::vector<detail::CompensatedSum> acc(total);
        for (std::size_t flat = 0; flat < p_.size(); ++flat) {
            if (p_[flat] == 0.0) continue;
            auto v = decode(flat);
            std::size_t mi = 0;
            for (std::size_t j = 0; j < idx.size(); ++j) mi = mi * msizes[j] + v[idx[j]];
            acc[mi].add(p_[flat]);
        }
        std::vector<double> mp(total);
        for (std::size_t i = 0; i < total; ++i) mp[i] = std::max(0.0, acc[i].value());
        return JointDist(keep, msizes, std::move(mp));
    }

    double entropy_all() const {
        detail::CompensatedSum h;
        for (double v : p_)
            if (v > 0.0) h.add(-v * std::log2(v));
        return h.value();
    }

    /// H(vars | given) = H(vars u given) - H(given); exact chain rule on the
    /// enumerated table.
    double entropy(const std::vector<std::string>& vars,
                   const std::vector<std::string>& given = {}) const {
        for (const auto& v : vars)
            for (const auto& g : given)
                if (v == g) throw config_error("entropy: vars and given overlap");
        std::vector<std::string> joint = vars;
        joint.insert(joint.end(), given.begin(), given.end());
        double hj = marginal(joint).entropy_all();
        if (given.empty()) return hj;
        return hj - marginal(given).entropy_all();
    }

    /// Average-conditional min-entropy:
    ///   -log2 sum_given Pr(given) max_target Pr(target | given).
    double min_entropy(const std::vector<std::string>& target,
                       const std::vector<std::string>& given = {}) const {
        std::vector<std::string> joint = target;
        joint.insert(joint.end(), given.begin(), given.end());
        JointDist jm = marginal(joint);
        std::size_t tsize = 1;
        for (const auto& t : target) tsize *= sizes_[index_of(t)];
        std::size_t gsize = jm.table().size() / tsize;
        // target variables are the leading block of jm, so flat = ti * gsize + gi
        detail::CompensatedSum s;
        for (std::size_t gi = 0; gi < gsize; ++gi) {
            double mx = 0.0;
            for (std::size_t ti = 0; ti < tsize; ++ti)
                mx = std::max(mx, jm.table()[ti * gsize + gi]);
            s.add(mx);
        }
        return -std::log2(s.value());
    }

    /// Best-single-key min-entropy form:
    ///   -log2 sum_cond Pr(cond) max_{key, target} Pr(target | key, cond).
    /// Lower-bounds the average form; the safe length source for sacrifices.
    double min_entropy_best_key(const std::vector<std::string>& target,
                                const std::vector<std::string>& keys,
                                const std::vector<std::string>& cond) const {
        std::vector<std::string> all = target;
        all.insert(all.end(), keys.begin(), keys.end());
        all.insert(all.end(), cond.begin(), cond.end());
        JointDist jm = marginal(all);
        std::size_t tsize = 1, ksize = 1, csize = 1;
        for (const auto& t : target) tsize *= sizes_[index_of(t)];
        for (const auto& k : keys) ksize *= sizes_[index_of(k)];
        for (const auto& c : cond) csize *= sizes_[index_of(c)];

        std::vector<std::string> kc = keys;
        kc.insert(kc.end(), cond.begin(), cond.end());
        JointDist pkc = marginal(kc);

        detail::CompensatedSum s;
        for (std::size_t ci = 0; ci < csize; ++ci) {
            double mx = 0.0;
            detail::CompensatedSum pc;
            for (std::size_t ki = 0; ki < ksize; ++ki) {
                double pkci = pkc.table()[ki * csize + ci];
                pc.add(pkci);
                if (pkci <= 0.0) continue;
                for (std::size_t ti = 0; ti < tsize; ++ti) {
                    double pj = jm.table()[(ti * ksize + ki) * csize + ci];
                    mx = std::max(mx, pj / pkci);
                }
            }
            s.add(pc.value() * mx);
        }
        return -std::log2(s.value());
    }

private:
    std::vector<std::string> names_;
    std::vector<std::uint32_t> sizes_;
    std::vector<double> p_;
};

struct Eq10Report {
    double lhs = 0.0;          // H(S | C_E, X)
    double rhs = 0.0;          // H(S, C_E, X) - H(C_E, X, E)
    double gap = 0.0;          // H(E | C_E, X), the slack of the inequality
    double hidden_given_noise = 0.0;  // H(S | C_E, X, E); zero by the cipher constraint
    bool holds = false;
    bool equality = false;
};

/// Secrecy inequality for the noisy-ciphertext model C_E = X + S + E mod 2:
///   H(S | C_E, X) >= H(S, C_E, X) - H(C_E, X, E),
/// with equality exactly when E is a deterministic function of (C_E, X).
inline Eq10Report check_secrecy_inequality(const JointDist& d, const std::string& s,
                                           const std::string& c, const std::string& x,
                                           const std::string& e, double tol = 1e-9) {
    // support must satisfy the cipher constraint, XOR on equal alphabets
    auto sizes = d.sizes();
    std::size_t si = d.index_of(s), ci = d.index_of(c), xi = d.index_of(x), ei = d.index_of(e);
    if (!(sizes[si] == sizes[ci] && sizes[ci] == sizes[xi] && sizes[xi] == sizes[ei]))
        throw config_error("secrecy check: variable alphabets must match");
    for (std::size_t flat = 0; flat < d.table().size(); ++flat) {
        if (d.table()[flat] <= 0.0) continue;
        auto v = d.decode(flat);
        if ((v[xi] ^ v[si] ^ v[ei]) != v[ci])
            throw config_error("secrecy check: support violates the cipher constraint");
    }

    Eq10Report rep;
    rep.lhs = d.entropy({s}, {c, x});
    rep.rhs = d.entropy({s, c, x}) - d.entropy({c, x, e});
    rep.gap = rep.lhs - rep.rhs;
    rep.hidden_given_noise = d.entropy({s}, {c, x, e});
    rep.holds = rep.gap >= -tol;
    rep.equality = std::abs(rep.gap) <= tol;
    return rep;
}

struct SecrecyDeviation {
    bool perfect = false;
    double max_deviation = 0.0;
};

/// Tests Pr(x | c) = Pr(x) on every pair with Pr(c) > 0.
inline SecrecyDeviation perfect_secrecy_check(const JointDist& d, const std::string& x,
                                              const std::string& c, double tol = 1e-9) {
    JointDist jm = d.marginal({x, c});
    JointDist px = d.marginal({x});
    JointDist pc = d.marginal({c});
    std::size_t nx = px.table().size(), nc = pc.table().size();
    SecrecyDeviation out;
    for (std::size_t ci = 0; ci < nc; ++ci) {
        if (pc.table()[ci] <= 0.0) continue;
        for (std::size_t xi = 0; xi < nx; ++xi) {
            double cond = jm.table()[xi * nc + ci] / pc.table()[ci];
            out.max_deviation = std::max(out.max_deviation, std::abs(cond - px.table()[xi]));
        }
    }
    out.perfect = out.max_deviation <= tol;
    return out;
}

} // namespace y00lab::infotheory
