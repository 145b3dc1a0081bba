#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kljn/errors.hpp"
#include "kljn/rng.hpp"
#include "kljn/spectral.hpp"
#include "kljn/stats.hpp"
#include "kljn/types.hpp"

namespace kljn {

inline constexpr double kBoltzmannRounded = 1.38e-23;   // J/K, value used by the reference tables
inline constexpr double kBoltzmannCodata = 1.380649e-23;

/// Physical and sampling parameters of one KLJN line.
///
/// The time step is always derived from the noise bandwidth (Nyquist rate),
/// never stored.
struct SystemParams {
    double r_low = 10e3;        // Ohm
    double r_high = 100e3;      // Ohm
    double t_eff = 1e18;        // K
    double bandwidth = 500.0;   // Hz
    double boltzmann = kBoltzmannRounded;
    std::size_t n_steps = 1000;
    std::size_t ensemble = 10;

    [[nodiscard]] double tau() const { return 1.0 / (2.0 * bandwidth); }

    [[nodiscard]] double resistance(Selection s) const { return s == Selection::L ? r_low : r_high; }

    void validate() const {
        detail::require(r_low > 0.0 && r_high > r_low, "params: need r_high > r_low > 0");
        detail::require(t_eff > 0.0, "params: t_eff must be positive");
        detail::require(bandwidth > 0.0, "params: bandwidth must be positive");
        detail::require(boltzmann > 0.0, "params: boltzmann constant must be positive");
        detail::require(n_steps >= 2, "params: n_steps must be >= 2");
        detail::require(ensemble >= 1, "params: ensemble must be >= 1");
    }
};

/// Uniformly sampled voltage (or current, or power) series. Immutable.
class NoiseTrace {
public:
    NoiseTrace(std::vector<double> samples, double dt, std::string label = {})
        : samples_(std::move(samples)), dt_(dt), label_(std::move(label)) {
        detail::require(samples_.size() >= 2, "trace: length must be >= 2");
        detail::require(dt_ > 0.0 && std::isfinite(dt_), "trace: dt must be positive");
        if (!stats::all_finite(samples_)) throw NumericError("trace '" + label_ + "': non-finite sample");
    }

    [[nodiscard]] std::span<const double> samples() const { return samples_; }
    [[nodiscard]] std::size_t size() const { return samples_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return samples_[i]; }
    [[nodiscard]] double dt() const { return dt_; }
    [[nodiscard]] const std::string& label() const { return label_; }

    [[nodiscard]] double rms() const { return stats::rms(samples_); }
    [[nodiscard]] double mean_square() const { return stats::mean_square(samples_); }

    [[nodiscard]] NoiseTrace relabeled(std::string label) const { return {samples_, dt_, std::move(label)}; }

    friend bool operator==(const NoiseTrace& a, const NoiseTrace& b) {
        return a.dt_ == b.dt_ && a.samples_ == b.samples_;
    }

private:
    std::vector<double> samples_;
    double dt_;
    std::string label_;
};

/// The four independent source noises of one bit-exchange period.
struct SourceBank {
    NoiseTrace u_HA;
    NoiseTrace u_LA;
    NoiseTrace u_HB;
    NoiseTrace u_LB;

    [[nodiscard]] const NoiseTrace& get(Side side, Selection sel) const {
        if (side == Side::alice) return sel == Selection::L ? u_LA : u_HA;
        return sel == Selection::L ? u_LB : u_HB;
    }
};

namespace detail {

inline std::vector<double> centered_unit(std::vector<double> v, const std::string& what) {
    const double m = stats::mean(v);
    for (double& x : v) x -= m;
    const double r = stats::rms(v);
    if (!std::isfinite(r)) throw NumericError(what + ": non-finite intermediate");
    if (r == 0.0) throw DegenerateSignal(what + ": zero variance");
    for (double& x : v) x /= r;
    return v;
}

}  // namespace detail

/// Pointwise average of `n_ensemble` standard-Gaussian series, then shifted to
/// zero sample mean and scaled to unit sample RMS.
inline NoiseTrace generate_unit_gaussian(std::size_t n_samples, std::size_t n_ensemble, RngStream& rng,
                                         double dt = 1.0) {
    detail::require(n_samples >= 2, "generate_unit_gaussian: n_samples must be >= 2");
    detail::require(n_ensemble >= 1, "generate_unit_gaussian: n_ensemble must be >= 1");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> acc(n_samples, 0.0);
    for (std::size_t e = 0; e < n_ensemble; ++e)
        for (double& v : acc) v += normal(rng);
    const double inv = 1.0 / static_cast<double>(n_ensemble);
    for (double& v : acc) v *= inv;
    return {detail::centered_unit(std::move(acc), "generate_unit_gaussian"), dt, "unit-gaussian"};
}

/// Doubles the sampling rate by zero-padding the spectrum above the original
/// Nyquist frequency. The output has twice the samples at half the spacing,
/// carries no power above the original band, and keeps the input's RMS.
/// In strict mode the length must be a power of two.
inline NoiseTrace antialias(const NoiseTrace& trace, bool strict = true) {
    const std::size_t n = trace.size();
    if (strict) detail::require(std::has_single_bit(n), "antialias: length must be a power of two");
    const double in_rms = trace.rms();
    if (in_rms == 0.0) return {std::vector<double>(2 * n, 0.0), trace.dt() / 2.0, trace.label() + "+antialias"};

    const spectral::Spectrum spec = spectral::forward(trace.samples());
    const std::size_t out_n = 2 * n;
    spectral::Spectrum padded(out_n / 2 + 1, {0.0, 0.0});
    for (std::size_t k = 0; k < spec.size(); ++k) padded[k] = spec[k];
    // The original Nyquist bin stands for both +f and -f; in the longer
    // transform those are distinct bins, so split the energy.
    if (n % 2 == 0) padded[n / 2] *= 0.5;

    std::vector<double> out = spectral::inverse(padded, out_n);
    const double r = stats::rms(out);
    if (!std::isfinite(r) || r == 0.0) throw NumericError("antialias: degenerate inverse transform");
    const double scale = in_rms / r;
    for (double& v : out) v *= scale;
    return {std::move(out), trace.dt() / 2.0, trace.label() + "+antialias"};
}

/// Johnson noise RMS voltage sqrt(4 k T R df) for a single resistor.
inline double johnson_rms(double resistance, const SystemParams& params) {
    detail::require(resistance > 0.0, "johnson_rms: resistance must be positive");
    return std::sqrt(4.0 * params.boltzmann * params.t_eff * resistance * params.bandwidth);
}

inline NoiseTrace scale_to_johnson(const NoiseTrace& trace, double resistance, const SystemParams& params) {
    const double target = johnson_rms(resistance, params);
    const double r = trace.rms();
    if (r == 0.0) throw DegenerateSignal("scale_to_johnson: zero-variance input '" + trace.label() + "'");
    const double g = target / r;
    std::vector<double> out(trace.samples().begin(), trace.samples().end());
    for (double& v : out) v *= g;
    return {std::move(out), trace.dt(), trace.label()};
}

/// Intermediate products of the noise synthesis pipeline.
struct NoiseStages {
    NoiseTrace raw;          // ensemble-averaged Gaussian, power-of-two length, spacing tau
    NoiseTrace antialiased;  // twice the samples at tau/2, no power above the original band
    NoiseTrace output;       // n_steps samples at tau, zero mean, unit RMS
};

/// Full synthesis pipeline for one zero-mean, unit-RMS noise of n_steps
/// samples at spacing tau: ensemble-averaged Gaussian, antialiased, then
/// decimated back to spacing tau so the noise is white over (0, bandwidth).
inline NoiseStages synthesize_unit_noise(const SystemParams& params, RngStream rng, std::string label = "noise") {
    params.validate();
    const std::size_t raw_len = std::bit_ceil(params.n_steps);
    NoiseTrace raw = generate_unit_gaussian(raw_len, params.ensemble, rng, params.tau());
    NoiseTrace fine = antialias(raw);
    std::vector<double> out(params.n_steps);
    for (std::size_t i = 0; i < params.n_steps; ++i) out[i] = fine[2 * i];
    NoiseTrace output(detail::centered_unit(std::move(out), "make_unit_noise"), params.tau(), std::move(label));
    return {std::move(raw), std::move(fine), std::move(output)};
}

inline NoiseTrace make_unit_noise(const SystemParams& params, RngStream rng, std::string label = "noise") {
    return synthesize_unit_noise(params, rng, std::move(label)).output;
}

inline NoiseTrace make_johnson_noise(double resistance, const SystemParams& params, RngStream rng,
                                     std::string label = "noise") {
    return scale_to_johnson(make_unit_noise(params, rng, std::move(label)), resistance, params);
}

/// Statistical summary of one Johnson-scaled noise and its synthesis stages.
struct NoiseQuality {
    std::size_t samples = 0;
    double rms = 0.0;
    double target_rms = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double flatness_db = 0.0;   // worst in-band Welch bin vs band mean, output series; NaN if too short
    double rejection_db = 0.0;  // in-band over out-of-band power, antialiased series

    [[nodiscard]] double rms_rel_error() const { return std::abs(rms / target_rms - 1.0); }
};

/// Welch segment length used for flatness: 1024, or less for short series.
inline std::size_t flatness_segment(std::size_t n) {
    return std::min<std::size_t>(1024, std::max<std::size_t>(2, std::bit_floor(n / 16 + 1)));
}

inline NoiseQuality assess_noise(const NoiseTrace& scaled, const NoiseStages& stages, double resistance,
                                 const SystemParams& params) {
    NoiseQuality q;
    q.samples = scaled.size();
    q.rms = scaled.rms();
    q.target_rms = johnson_rms(resistance, params);
    const stats::Moments mo = stats::moments(scaled.samples());
    q.skewness = mo.skewness;
    q.excess_kurtosis = mo.excess_kurtosis;
    const std::size_t seg = flatness_segment(scaled.size());
    if (seg >= 8) {
        q.flatness_db = spectral::flatness_db(spectral::welch(scaled.samples(), scaled.dt(), seg), 0.0, params.bandwidth);
    } else {
        q.flatness_db = std::numeric_limits<double>::quiet_NaN();
    }
    const auto fine = spectral::periodogram(stages.antialiased.samples(), stages.antialiased.dt());
    q.rejection_db = spectral::rejection_db(fine, params.bandwidth);
    return q;
}

namespace detail {

inline constexpr std::array<std::pair<Side, Selection>, 4> kBankOrder{{
    {Side::alice, Selection::H},
    {Side::alice, Selection::L},
    {Side::bob, Selection::H},
    {Side::bob, Selection::L},
}};

inline std::string source_name(Side side, Selection sel) {
    return std::string("u_") + to_string(sel) + (side == Side::alice ? "A" : "B");
}

}  // namespace detail

/// Four independent Johnson-scaled sources, one disjoint stream each.
inline SourceBank make_source_bank(const SystemParams& params, const RngStream& rng) {
    params.validate();
    auto make = [&](std::size_t i) {
        const auto [side, sel] = detail::kBankOrder[i];
        return make_johnson_noise(params.resistance(sel), params, rng.split("source", i),
                                  detail::source_name(side, sel));
    };
    return {make(0), make(1), make(2), make(3)};
}

/// Unit-RMS mixing noises for Eve's four copies.
inline SourceBank make_mixing_bank(const SystemParams& params, const RngStream& rng) {
    params.validate();
    auto make = [&](std::size_t i) {
        const auto [side, sel] = detail::kBankOrder[i];
        return make_unit_noise(params, rng.split("eve-mix", i), "x_" + detail::source_name(side, sel).substr(2));
    };
    return {make(0), make(1), make(2), make(3)};
}

/// Scale factor applied to the unit mixing noise before it is added to the
/// unit-RMS source: M times the Johnson RMS in volts, or plain M.
inline double mixing_multiplier(double m, MixingMode mode, double resistance, const SystemParams& params) {
    detail::require(m >= 0.0, "mixing multiplier M must be >= 0");
    return mode == MixingMode::johnson_scaled ? m * johnson_rms(resistance, params) : m;
}

/// Design correlation between a source and Eve's copy of it.
inline double design_rho(double m, MixingMode mode, double resistance, const SystemParams& params) {
    const double mr = mixing_multiplier(m, mode, resistance, params);
    return 1.0 / std::sqrt(1.0 + mr * mr);
}

/// Eve's copy of `source` built from a given unit-RMS mixing noise:
/// y = source/rms(source) + m_R * x, rescaled to the Johnson RMS of R.
inline NoiseTrace mix_eve_copy(const NoiseTrace& source, const NoiseTrace& unit_mix, double resistance, double m,
                               MixingMode mode, const SystemParams& params) {
    const double mr = mixing_multiplier(m, mode, resistance, params);
    const double src_rms = source.rms();
    if (src_rms == 0.0) throw DegenerateSignal("make_eve_copy: zero-variance source");
    if (m == 0.0) return source.relabeled("eve:" + source.label());
    detail::require(unit_mix.size() == source.size(), "make_eve_copy: mixing noise length mismatch");
    std::vector<double> y(source.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = source[i] / src_rms + mr * unit_mix[i];
    const double ym = stats::mean(y);
    for (double& v : y) v -= ym;
    return scale_to_johnson(NoiseTrace(std::move(y), source.dt(), "eve:" + source.label()), resistance, params);
}

inline NoiseTrace make_eve_copy(const NoiseTrace& source, double resistance, double m, MixingMode mode,
                                const SystemParams& params, const RngStream& rng) {
    detail::require(m >= 0.0, "make_eve_copy: M must be >= 0");
    SystemParams p = params;
    p.n_steps = source.size();
    return mix_eve_copy(source, make_unit_noise(p, rng, "x"), resistance, m, mode, params);
}

/// Eve's partially correlated knowledge of the four sources.
struct EveModel {
    double m = 0.0;
    MixingMode mode = MixingMode::johnson_scaled;
    SourceBank copies;
    double rho_low = 1.0;
    double rho_high = 1.0;
};

inline EveModel eve_model(const SourceBank& bank, const SourceBank& mixing, double m, MixingMode mode,
                          const SystemParams& params) {
    detail::require(m >= 0.0, "eve_model: M must be >= 0");
    auto copy = [&](Side side, Selection sel) {
        return mix_eve_copy(bank.get(side, sel), mixing.get(side, sel), params.resistance(sel), m, mode, params);
    };
    return EveModel{
        m,
        mode,
        SourceBank{copy(Side::alice, Selection::H), copy(Side::alice, Selection::L), copy(Side::bob, Selection::H),
                   copy(Side::bob, Selection::L)},
        design_rho(m, mode, params.r_low, params),
        design_rho(m, mode, params.r_high, params),
    };
}

/// Draws four fresh mixing noises from `rng` (disjoint from the source
/// streams by purpose tag) and builds the model.
inline EveModel eve_model(const SourceBank& bank, double m, MixingMode mode, const SystemParams& params,
                          const RngStream& rng) {
    SystemParams p = params;
    p.n_steps = bank.u_LA.size();
    return eve_model(bank, make_mixing_bank(p, rng), m, mode, params);
}

}  // namespace kljn
