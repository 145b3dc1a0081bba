#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <mutex>
#include <span>
#include <vector>

#include "kljn/errors.hpp"

namespace kljn::spectral {

namespace detail {

// FFTW planning is not thread-safe; execution on distinct arrays is.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class Plan {
public:
    explicit Plan(fftw_plan p) : plan_(p) {
        if (plan_ == nullptr) throw NumericError("fftw: plan creation failed");
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    ~Plan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_;
};

}  // namespace detail

using Spectrum = std::vector<std::complex<double>>;

/// Unnormalised real-to-complex DFT; returns n/2 + 1 bins.
inline Spectrum forward(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    if (n < 1) throw InvalidArgument("fft: empty input");
    std::vector<double> in(x.begin(), x.end());
    Spectrum out(static_cast<std::size_t>(n / 2 + 1));
    fftw_plan raw;
    {
        std::lock_guard lock(detail::planner_mutex());
        raw = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                   FFTW_ESTIMATE);
    }
    detail::Plan(raw).execute();
    return out;
}

/// Unnormalised complex-to-real inverse DFT of length n from n/2 + 1 bins.
inline std::vector<double> inverse(const Spectrum& bins, std::size_t n) {
    if (bins.size() != n / 2 + 1) throw InvalidArgument("ifft: bin count does not match length");
    Spectrum in = bins;  // c2r overwrites its input
    std::vector<double> out(n);
    fftw_plan raw;
    {
        std::lock_guard lock(detail::planner_mutex());
        raw = fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                   out.data(), FFTW_ESTIMATE);
    }
    detail::Plan(raw).execute();
    return out;
}

/// One-sided power spectral density estimate.
struct Psd {
    double df = 0.0;             // bin spacing (Hz)
    std::vector<double> power;   // V^2/Hz per bin, bin k at k * df

    [[nodiscard]] double frequency(std::size_t k) const { return static_cast<double>(k) * df; }
};

/// Single full-length periodogram (rectangular window).
inline Psd periodogram(std::span<const double> x, double dt) {
    const std::size_t n = x.size();
    if (n < 2 || !(dt > 0.0)) throw InvalidArgument("periodogram: need n >= 2 and dt > 0");
    const Spectrum s = forward(x);
    Psd psd;
    psd.df = 1.0 / (static_cast<double>(n) * dt);
    psd.power.resize(s.size());
    const double scale = dt / static_cast<double>(n);
    for (std::size_t k = 0; k < s.size(); ++k) {
        const bool edge = (k == 0) || (n % 2 == 0 && k == n / 2);
        psd.power[k] = std::norm(s[k]) * scale * (edge ? 1.0 : 2.0);
    }
    return psd;
}

/// Block-averaged periodogram over non-overlapping segments.
inline Psd welch(std::span<const double> x, double dt, std::size_t segment) {
    if (segment < 2 || segment > x.size()) throw InvalidArgument("welch: bad segment length");
    const std::size_t blocks = x.size() / segment;
    Psd acc;
    for (std::size_t b = 0; b < blocks; ++b) {
        Psd p = periodogram(x.subspan(b * segment, segment), dt);
        if (acc.power.empty()) {
            acc = std::move(p);
        } else {
            for (std::size_t k = 0; k < p.power.size(); ++k) acc.power[k] += p.power[k];
        }
    }
    for (double& v : acc.power) v /= static_cast<double>(blocks);
    return acc;
}

inline double band_mean(const Psd& psd, double f_lo, double f_hi) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 1; k < psd.power.size(); ++k) {
        const double f = psd.frequency(k);
        if (f > f_lo && f < f_hi) {
            s += psd.power[k];
            ++n;
        }
    }
    if (n == 0) throw InvalidArgument("band_mean: no bins in band");
    return s / static_cast<double>(n);
}

/// Largest deviation (dB) of any bin in (f_lo, f_hi) from the band mean.
inline double flatness_db(const Psd& psd, double f_lo, double f_hi) {
    const double m = band_mean(psd, f_lo, f_hi);
    double worst = 0.0;
    for (std::size_t k = 1; k < psd.power.size(); ++k) {
        const double f = psd.frequency(k);
        if (f > f_lo && f < f_hi)
            worst = std::max(worst, std::abs(10.0 * std::log10(psd.power[k] / m)));
    }
    return worst;
}

/// In-band mean over out-of-band mean, in dB. Out-of-band starts strictly
/// above `edge`; the edge bin itself is excluded from both sides.
inline double rejection_db(const Psd& psd, double edge) {
    const double in = band_mean(psd, 0.0, edge);
    const double top = psd.frequency(psd.power.size() - 1);
    const double out = band_mean(psd, edge + psd.df * 0.5, top + psd.df);
    if (out <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(in / out);
}

}  // namespace kljn::spectral
