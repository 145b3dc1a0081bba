#pragma once

// Closed-form population correlations for every statistic the attacks
// compute. Signals are linear maps over orthonormal latent Gaussian sources;
// no sampled data is involved anywhere in this header.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "kljn/errors.hpp"
#include "kljn/types.hpp"

namespace kljn::oracle {

/// Physical constants the oracle needs. Kept separate from SystemParams so
/// that this header has no dependency on the simulator.
struct LineConstants {
    double r_low = 10e3;
    double r_high = 100e3;
    double t_eff = 1e18;
    double bandwidth = 500.0;
    double boltzmann = 1.38e-23;

    [[nodiscard]] double resistance(Selection s) const { return s == Selection::L ? r_low : r_high; }
    [[nodiscard]] double sigma(Selection s) const {
        return std::sqrt(4.0 * boltzmann * t_eff * resistance(s) * bandwidth);
    }
};

/// Weighted sum of unit-variance, mutually independent latent sources.
struct LinearSignal {
    std::map<std::string, double> weights;

    LinearSignal& add(const std::string& latent, double w) {
        weights[latent] += w;
        return *this;
    }
    [[nodiscard]] double weight(const std::string& latent) const {
        const auto it = weights.find(latent);
        return it == weights.end() ? 0.0 : it->second;
    }
    friend LinearSignal operator*(double a, LinearSignal s) {
        for (auto& [k, w] : s.weights) w *= a;
        return s;
    }
    friend LinearSignal operator+(LinearSignal a, const LinearSignal& b) {
        for (const auto& [k, w] : b.weights) a.add(k, w);
        return a;
    }
};

inline double covariance(const LinearSignal& a, const LinearSignal& b) {
    double s = 0.0;
    for (const auto& [k, w] : a.weights) s += w * b.weight(k);
    return s;
}

inline double variance(const LinearSignal& a) { return covariance(a, a); }

inline double correlation(const LinearSignal& a, const LinearSignal& b) {
    const double va = variance(a), vb = variance(b);
    if (va <= 0.0 || vb <= 0.0) throw DegenerateSignal("oracle: zero-variance signal");
    return covariance(a, b) / std::sqrt(va * vb);
}

/// Correlation of the products x1*y1 and x2*y2 for zero-mean jointly Gaussian
/// signals (Isserlis): cov = c(x1,x2)c(y1,y2) + c(x1,y2)c(y1,x2),
/// var(xy) = var(x)var(y) + c(x,y)^2.
inline double product_correlation(const LinearSignal& x1, const LinearSignal& y1, const LinearSignal& x2,
                                  const LinearSignal& y2) {
    const double cov =
        covariance(x1, x2) * covariance(y1, y2) + covariance(x1, y2) * covariance(y1, x2);
    const double v1 = variance(x1) * variance(y1) + std::pow(covariance(x1, y1), 2);
    const double v2 = variance(x2) * variance(y2) + std::pow(covariance(x2, y2), 2);
    if (v1 <= 0.0 || v2 <= 0.0) throw DegenerateSignal("oracle: zero-variance product");
    return cov / std::sqrt(v1 * v2);
}

inline double rho_from_m(double m, MixingMode mode, Selection r, const LineConstants& k) {
    if (!(m >= 0.0)) throw InvalidArgument("rho_from_m: M must be >= 0");
    const double mr = mode == MixingMode::johnson_scaled ? m * k.sigma(r) : m;
    return 1.0 / std::sqrt(1.0 + mr * mr);
}

/// Whose view of the line a signal belongs to.
struct Observer {
    bool eve = false;
    double m = 0.0;
    MixingMode mode = MixingMode::johnson_scaled;
    Knowledge knowledge = Knowledge::bilateral;

    static Observer parties() { return {}; }
    static Observer eve_with(double m, MixingMode mode, Knowledge kn = Knowledge::bilateral) {
        return {true, m, mode, kn};
    }
};

inline std::string latent_suffix(Side side, Selection sel) {
    return to_string(sel) + (side == Side::alice ? "A" : "B");
}

/// Source voltage as seen by `who`. Eve's copy with design correlation rho
/// is rho*u + sqrt(1-rho^2)*x; without knowledge of Bob it is a dummy.
inline LinearSignal source_as_linear(Side side, Selection sel, const Observer& who, const LineConstants& k) {
    const std::string sfx = latent_suffix(side, sel);
    const double sigma = k.sigma(sel);
    LinearSignal s;
    if (!who.eve) return s.add("u_" + sfx, sigma);
    if (side == Side::bob && who.knowledge == Knowledge::unilateral_alice) return s.add("d_" + sfx, sigma);
    const double rho = rho_from_m(who.m, who.mode, sel, k);
    s.add("u_" + sfx, rho * sigma);
    if (rho < 1.0) s.add("x_" + sfx, std::sqrt(1.0 - rho * rho) * sigma);
    return s;
}

/// Wire voltage or current of a combination as a linear signal.
inline LinearSignal wire_as_linear(Combo combo, const Observer& who, Channel channel, const LineConstants& k) {
    const Selection a = alice_of(combo), b = bob_of(combo);
    const double ra = k.resistance(a), rb = k.resistance(b);
    const LinearSignal ua = source_as_linear(Side::alice, a, who, k);
    const LinearSignal ub = source_as_linear(Side::bob, b, who, k);
    switch (channel) {
        case Channel::voltage: return (rb / (ra + rb)) * ua + (ra / (ra + rb)) * ub;
        case Channel::current: return (1.0 / (ra + rb)) * ua + (-1.0 / (ra + rb)) * ub;
        default: break;
    }
    throw InvalidArgument("wire_as_linear: channel must be voltage or current");
}

/// Measured signal and Eve's estimate of it, as linear signals.
struct SignalPair {
    LinearSignal measured;
    LinearSignal estimate;
};

/// Wire voltage or current of `truth` against Eve's simulated `probe` wire.
inline SignalPair wire_pair(Combo truth, Combo probe, Channel channel, Knowledge knowledge, double m, MixingMode mode,
                            const LineConstants& k) {
    return {wire_as_linear(truth, Observer::parties(), channel, k),
            wire_as_linear(probe, Observer::eve_with(m, mode, knowledge), channel, k)};
}

/// Loop-law reconstruction of `side`'s source (using r_hyp) against Eve's
/// copy of that side's `against` source.
inline SignalPair source_pair(Combo truth, Side side, double r_hyp, Selection against, double m, MixingMode mode,
                              const LineConstants& k, Knowledge knowledge = Knowledge::bilateral) {
    if (!(r_hyp > 0.0)) throw InvalidArgument("source_pair: resistance must be positive");
    const Observer parties = Observer::parties();
    const LinearSignal u = wire_as_linear(truth, parties, Channel::voltage, k);
    const LinearSignal i = wire_as_linear(truth, parties, Channel::current, k);
    const double sign = side == Side::alice ? 1.0 : -1.0;
    return {u + (sign * r_hyp) * i, source_as_linear(side, against, Observer::eve_with(m, mode, knowledge), k)};
}

/// Population CCC between the measured wire of `truth` and Eve's probe.
inline double predict_ccc(Combo truth, Combo probe, Channel channel, Knowledge knowledge, double m, MixingMode mode,
                          const LineConstants& k) {
    if (channel == Channel::power) {
        const Observer parties = Observer::parties();
        const Observer eve = Observer::eve_with(m, mode, knowledge);
        return product_correlation(wire_as_linear(truth, parties, Channel::voltage, k),
                                   wire_as_linear(truth, parties, Channel::current, k),
                                   wire_as_linear(probe, eve, Channel::voltage, k),
                                   wire_as_linear(probe, eve, Channel::current, k));
    }
    const SignalPair p = wire_pair(truth, probe, channel, knowledge, m, mode, k);
    return correlation(p.measured, p.estimate);
}

/// Population CCC of a source reconstruction against Eve's copy.
inline double predict_source_ccc(Combo truth, Side side, double r_hyp, Selection against, double m, MixingMode mode,
                                 const LineConstants& k, Knowledge knowledge = Knowledge::bilateral) {
    const SignalPair p = source_pair(truth, side, r_hyp, against, m, mode, k, knowledge);
    return correlation(p.measured, p.estimate);
}

/// Mean of the sample CCC of two linear signals over n samples when every
/// latent series has exactly zero sample mean and unit sample variance.
/// Then only the latent cross-correlations c_ij vary, each with variance
/// 1/(n-1) and uncorrelated to leading order, and
///   E[r] = F(I) + sum_{i<j} F_ij'' / (2(n-1)),
/// with F(C) = S_ab / sqrt(S_aa S_bb) and S_xy = w_x' C w_y linear in c_ij.
inline double expected_sample_correlation(const LinearSignal& a, const LinearSignal& b, std::size_t n) {
    if (n < 3) throw InvalidArgument("expected_sample_correlation: need n >= 3");
    std::vector<std::string> latents;
    for (const auto& [name, w] : a.weights) latents.push_back(name);
    for (const auto& [name, w] : b.weights)
        if (!a.weights.contains(name)) latents.push_back(name);

    const double s_ab = covariance(a, b), s_aa = variance(a), s_bb = variance(b);
    if (s_aa <= 0.0 || s_bb <= 0.0) throw DegenerateSignal("oracle: zero-variance signal");
    const double p = s_aa * s_bb;
    double curvature = 0.0;
    for (std::size_t i = 0; i < latents.size(); ++i) {
        for (std::size_t j = i + 1; j < latents.size(); ++j) {
            const auto d = [&](const LinearSignal& x, const LinearSignal& y) {
                return x.weight(latents[i]) * y.weight(latents[j]) + x.weight(latents[j]) * y.weight(latents[i]);
            };
            const double d_ab = d(a, b), d_aa = d(a, a), d_bb = d(b, b);
            const double dp = d_aa * s_bb + s_aa * d_bb;
            const double ddp = 2.0 * d_aa * d_bb;
            curvature += -d_ab * dp * std::pow(p, -1.5) + 0.75 * s_ab * dp * dp * std::pow(p, -2.5) -
                         0.5 * s_ab * ddp * std::pow(p, -1.5);
        }
    }
    return s_ab / std::sqrt(p) + curvature / (2.0 * static_cast<double>(n - 1));
}

/// Expected sample CCC a sweep should report for one wire cell. Power is
/// a product statistic and is compared with its population value.
inline double predict_sample_ccc(Combo truth, Combo probe, Channel channel, Knowledge knowledge, double m,
                                 MixingMode mode, const LineConstants& k, std::size_t n) {
    if (channel == Channel::power) return predict_ccc(truth, probe, channel, knowledge, m, mode, k);
    const SignalPair p = wire_pair(truth, probe, channel, knowledge, m, mode, k);
    return expected_sample_correlation(p.measured, p.estimate, n);
}

inline double predict_source_sample_ccc(Combo truth, Side side, double r_hyp, Selection against, double m,
                                        MixingMode mode, const LineConstants& k, std::size_t n,
                                        Knowledge knowledge = Knowledge::bilateral) {
    const SignalPair p = source_pair(truth, side, r_hyp, against, m, mode, k, knowledge);
    return expected_sample_correlation(p.measured, p.estimate, n);
}

}  // namespace kljn::oracle
