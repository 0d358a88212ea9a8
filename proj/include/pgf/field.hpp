#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "pgf/errors.hpp"

namespace pgf {

using cd = std::complex<double>;

enum class Representation { physical, fourier };

/// Uniform periodic grid over the box [-L, L)^n with N samples per axis.
/// The frequency grid is (pi/L) * Z^n folded to the symmetric range; an
/// optional half-spacing offset along one axis gives the Sigma_zeta-avoiding
/// sampling used by the Green operator.
struct GridSpec {
    int n = 0;              // spatial dimension
    int m = 1;              // operator order carried for bookkeeping
    int points_per_axis = 0;
    double half_width = 0.0;

    GridSpec() = default;
    GridSpec(int n_, int m_, int points, double half_width_);

    std::size_t total_points() const;
    double spacing() const { return 2.0 * half_width / points_per_axis; }
    double freq_spacing() const;
    double cell_volume() const;

    /// Physical coordinate of sample index i along one axis.
    double coordinate(int i) const { return -half_width + i * spacing(); }

    /// Folded integer frequency index of DFT slot k (standard grid).
    int folded_index(int k) const;

    /// Frequency value of DFT slot k; half_offset selects the
    /// Sigma_zeta-avoiding half-integer frequencies (k_fold - 1/2).
    double frequency(int k, bool half_offset = false) const;

    bool operator==(const GridSpec& o) const {
        return n == o.n && points_per_axis == o.points_per_axis &&
               half_width == o.half_width;
    }
};

/// Complex scalar field sampled on a GridSpec, flat row-major storage
/// (axis 0 slowest), tagged with its current representation.
struct ComplexField {
    GridSpec grid;
    Representation rep = Representation::physical;
    std::vector<cd> data;

    ComplexField() = default;
    ComplexField(const GridSpec& g, Representation r = Representation::physical)
        : grid(g), rep(r), data(g.total_points(), cd(0.0, 0.0)) {}
};

struct WeightedNormSpec {
    double sigma = 0.0;
    double p = 2.0;  // >= 1, or infinity
};

/// Iterate all grid points; fn(idx, flat) receives the per-axis index vector.
void for_each_index(const GridSpec& grid,
                    const std::function<void(std::span<const int>, std::size_t)>& fn);

/// Discrete approximation of f_hat(xi) = \int e^{-i x.xi} f(x) dx on the
/// folded frequency grid (quadrature weight (2L/N)^n, no 2*pi in the
/// forward exponent).
ComplexField fft_forward(const ComplexField& f);

/// Inverse transform carrying the (2*pi)^{-n} factor.
ComplexField fft_inverse(const ComplexField& f);

/// Apply a Fourier multiplier xi -> fn(xi) to a physical field and return a
/// physical field. offset_axis >= 0 evaluates the multiplier on the
/// half-integer (Sigma_zeta-avoiding) frequencies along that axis; the
/// round trip through the offset basis is exact.
ComplexField apply_multiplier(const ComplexField& f,
                              const std::function<cd(std::span<const double>)>& fn,
                              int offset_axis = -1);

/// Same as apply_multiplier but with the multiplier pre-tabulated over the
/// DFT slots (flat row-major order, matching the sampling implied by
/// offset_axis).
ComplexField apply_tabulated_multiplier(const ComplexField& f,
                                        std::span<const cd> multiplier,
                                        int offset_axis = -1);

/// Weighted L^p norm: (sum (1+|x|^2)^{sigma p/2} |f|^p h^n)^{1/p}; for
/// p = infinity the weighted sup over the grid.
double norm(const ComplexField& f, const WeightedNormSpec& spec);

/// Plain L^p norm shorthand.
double lp_norm(const ComplexField& f, double p);

/// The symbol p_zeta(xi) = |xi|^2 - 2 i zeta.xi in raw coordinates.
cd symbol_p(std::span<const cd> zeta, std::span<const double> xi);

/// (-Delta - 2 zeta.grad)^m w computed spectrally (multiplier p_zeta^m).
ComplexField apply_conjugated_op(const ComplexField& w, std::span<const cd> zeta,
                                 int m, int offset_axis = -1);

/// Zero-pad f (physical) into a box enlarged by an integer factor (same
/// spacing), centered. Used to suppress wrap-around under growing weights.
ComplexField embed(const ComplexField& f, int factor);

/// Restrict a field on an enlarged box back to the original grid.
ComplexField crop(const ComplexField& f, const GridSpec& target);

// --- field generators -------------------------------------------------------

/// exp(-|x-c|^2 / (2 width^2))
ComplexField make_gaussian(const GridSpec& grid, std::span<const double> center,
                           double width);

/// C-infinity bump: height * exp(1 - 1/(1-r^2)) for r = |x-c|/radius < 1.
ComplexField make_bump(const GridSpec& grid, std::span<const double> center,
                       double radius, cd height);

/// e^{i xi0 . x} for xi0 on the standard frequency grid (per-axis folded
/// integer indices).
ComplexField make_plane_wave(const GridSpec& grid, std::span<const int> mode);

/// Pointwise a*f + b*g.
ComplexField axpby(cd a, const ComplexField& f, cd b, const ComplexField& g);

/// Pointwise product.
ComplexField multiply(const ComplexField& f, const ComplexField& g);

double rel_l2_error(const ComplexField& a, const ComplexField& b);

} // namespace pgf
