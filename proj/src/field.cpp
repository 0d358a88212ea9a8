#include "pgf/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

namespace pgf {

namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

std::mutex& planner_mutex() {
    static std::mutex mtx;
    return mtx;
}

/// In-place unnormalized multidimensional DFT (FFTW sign convention).
void raw_dft(const GridSpec& grid, std::vector<cd>& data, int sign) {
    std::vector<int> dims(grid.n, grid.points_per_axis);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft(grid.n, dims.data(), buf, buf, sign, FFTW_ESTIMATE);
    }
    if (!plan) throw NumericalFailure("FFTW planning failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
}

void require_physical(const ComplexField& f, const char* op) {
    if (f.rep != Representation::physical)
        throw ContractViolation(std::string(op) + ": expected a physical-space field");
}

} // namespace

GridSpec::GridSpec(int n_, int m_, int points, double half_width_)
    : n(n_), m(m_), points_per_axis(points), half_width(half_width_) {
    if (n < 1) throw ContractViolation("GridSpec: dimension must be >= 1");
    if (m < 1) throw ContractViolation("GridSpec: operator order must be >= 1");
    if (!is_pow2(points_per_axis) || points_per_axis < 8)
        throw ContractViolation("GridSpec: points per axis must be a power of two >= 8");
    if (!(half_width > 0.0)) throw ContractViolation("GridSpec: half width must be positive");
}

std::size_t GridSpec::total_points() const {
    std::size_t total = 1;
    for (int a = 0; a < n; ++a) total *= static_cast<std::size_t>(points_per_axis);
    return total;
}

double GridSpec::freq_spacing() const { return std::numbers::pi / half_width; }

double GridSpec::cell_volume() const {
    return std::pow(spacing(), n);
}

int GridSpec::folded_index(int k) const {
    const int N = points_per_axis;
    return k < N / 2 ? k : k - N;
}

double GridSpec::frequency(int k, bool half_offset) const {
    const int N = points_per_axis;
    if (half_offset) {
        const int kf = k <= N / 2 ? k : k - N;  // kf - 1/2 in [-N/2+1/2, N/2-1/2]
        return freq_spacing() * (kf - 0.5);
    }
    return freq_spacing() * folded_index(k);
}

void for_each_index(const GridSpec& grid,
                    const std::function<void(std::span<const int>, std::size_t)>& fn) {
    const int N = grid.points_per_axis;
    std::vector<int> idx(grid.n, 0);
    const std::size_t total = grid.total_points();
    for (std::size_t flat = 0; flat < total; ++flat) {
        fn(idx, flat);
        for (int a = grid.n - 1; a >= 0; --a) {
            if (++idx[a] < N) break;
            idx[a] = 0;
        }
    }
}

ComplexField fft_forward(const ComplexField& f) {
    require_physical(f, "fft_forward");
    ComplexField out = f;
    raw_dft(f.grid, out.data, FFTW_FORWARD);
    const double hn = f.grid.cell_volume();
    for_each_index(f.grid, [&](std::span<const int> idx, std::size_t flat) {
        int parity = 0;
        for (int a = 0; a < f.grid.n; ++a) parity += idx[a];
        out.data[flat] *= (parity % 2 == 0) ? hn : -hn;
    });
    out.rep = Representation::fourier;
    return out;
}

ComplexField fft_inverse(const ComplexField& f) {
    if (f.rep != Representation::fourier)
        throw ContractViolation("fft_inverse: expected a Fourier-space field");
    ComplexField out = f;
    for_each_index(f.grid, [&](std::span<const int> idx, std::size_t flat) {
        int parity = 0;
        for (int a = 0; a < f.grid.n; ++a) parity += idx[a];
        if (parity % 2 != 0) out.data[flat] = -out.data[flat];
    });
    raw_dft(f.grid, out.data, FFTW_BACKWARD);
    const double scale = std::pow(2.0 * f.grid.half_width, -f.grid.n);
    for (auto& v : out.data) v *= scale;
    out.rep = Representation::physical;
    return out;
}

namespace {

ComplexField apply_slotwise(const ComplexField& f,
                            const std::function<cd(std::size_t flat)>& slot_value,
                            int offset_axis) {
    require_physical(f, "apply_multiplier");
    const GridSpec& g = f.grid;
    if (offset_axis >= g.n)
        throw ContractViolation("apply_multiplier: offset axis out of range");
    const int N = g.points_per_axis;

    ComplexField out = f;
    std::vector<cd> phase(N);
    if (offset_axis >= 0) {
        // e^{i Delta (x_j + L)} with Delta = pi/(2L): shifts sampling to the
        // half-integer frequency basis, which the DFT diagonalizes exactly.
        for (int j = 0; j < N; ++j) {
            const double arg = std::numbers::pi * j / N;
            phase[j] = cd(std::cos(arg), std::sin(arg));
        }
        for_each_index(g, [&](std::span<const int> idx, std::size_t flat) {
            out.data[flat] *= phase[idx[offset_axis]];
        });
    }

    raw_dft(g, out.data, FFTW_FORWARD);
    const double inv_total = 1.0 / static_cast<double>(g.total_points());
    for (std::size_t flat = 0; flat < out.data.size(); ++flat)
        out.data[flat] *= slot_value(flat) * inv_total;
    raw_dft(g, out.data, FFTW_BACKWARD);

    if (offset_axis >= 0) {
        for_each_index(g, [&](std::span<const int> idx, std::size_t flat) {
            out.data[flat] *= std::conj(phase[idx[offset_axis]]);
        });
    }
    return out;
}

} // namespace

ComplexField apply_multiplier(const ComplexField& f,
                              const std::function<cd(std::span<const double>)>& fn,
                              int offset_axis) {
    const GridSpec& g = f.grid;
    const int N = g.points_per_axis;
    std::vector<std::vector<double>> freq(g.n, std::vector<double>(N));
    for (int a = 0; a < g.n; ++a)
        for (int k = 0; k < N; ++k) freq[a][k] = g.frequency(k, a == offset_axis);

    // Tabulate the multiplier in flat slot order.
    std::vector<cd> table(g.total_points());
    std::vector<double> xi(g.n);
    for_each_index(g, [&](std::span<const int> idx, std::size_t flat) {
        for (int a = 0; a < g.n; ++a) xi[a] = freq[a][idx[a]];
        table[flat] = fn(xi);
    });
    return apply_slotwise(f, [&table](std::size_t flat) { return table[flat]; },
                          offset_axis);
}

ComplexField apply_tabulated_multiplier(const ComplexField& f,
                                        std::span<const cd> multiplier,
                                        int offset_axis) {
    if (multiplier.size() != f.grid.total_points())
        throw ContractViolation("apply_tabulated_multiplier: size mismatch");
    return apply_slotwise(f, [&multiplier](std::size_t flat) { return multiplier[flat]; },
                          offset_axis);
}

double norm(const ComplexField& f, const WeightedNormSpec& spec) {
    require_physical(f, "norm");
    const double p = spec.p;
    const bool inf = std::isinf(p);
    if (!inf && !(p >= 1.0))
        throw InvalidExponent("norm: exponent must satisfy p >= 1 (or infinity)");
    const GridSpec& g = f.grid;
    std::vector<double> coord(g.points_per_axis);
    for (int i = 0; i < g.points_per_axis; ++i) coord[i] = g.coordinate(i);

    double acc = 0.0;
    for_each_index(g, [&](std::span<const int> idx, std::size_t flat) {
        double r2 = 0.0;
        for (int a = 0; a < g.n; ++a) r2 += coord[idx[a]] * coord[idx[a]];
        const double w = std::pow(1.0 + r2, 0.5 * spec.sigma);
        const double v = w * std::abs(f.data[flat]);
        if (inf)
            acc = std::max(acc, v);
        else
            acc += std::pow(v, p);
    });
    if (inf) return acc;
    return std::pow(acc * g.cell_volume(), 1.0 / p);
}

double lp_norm(const ComplexField& f, double p) { return norm(f, {0.0, p}); }

cd symbol_p(std::span<const cd> zeta, std::span<const double> xi) {
    double xi2 = 0.0;
    cd dot(0.0, 0.0);
    for (std::size_t a = 0; a < xi.size(); ++a) {
        xi2 += xi[a] * xi[a];
        dot += zeta[a] * xi[a];
    }
    return cd(xi2, 0.0) - 2.0 * cd(0.0, 1.0) * dot;
}

ComplexField apply_conjugated_op(const ComplexField& w, std::span<const cd> zeta,
                                 int m, int offset_axis) {
    if (static_cast<int>(zeta.size()) != w.grid.n)
        throw ContractViolation("apply_conjugated_op: zeta dimension mismatch");
    if (m < 1) throw ContractViolation("apply_conjugated_op: order must be >= 1");
    return apply_multiplier(
        w,
        [&zeta, m](std::span<const double> xi) {
            const cd p = symbol_p(zeta, xi);
            cd acc(1.0, 0.0);
            for (int j = 0; j < m; ++j) acc *= p;
            return acc;
        },
        offset_axis);
}

ComplexField embed(const ComplexField& f, int factor) {
    require_physical(f, "embed");
    if (factor < 2) throw ContractViolation("embed: factor must be >= 2");
    const GridSpec& g = f.grid;
    GridSpec big(g.n, g.m, g.points_per_axis * factor, g.half_width * factor);
    ComplexField out(big);
    const int shift = (big.points_per_axis - g.points_per_axis) / 2;
    const int Nb = big.points_per_axis;
    for_each_index(g, [&](std::span<const int> idx, std::size_t flat) {
        std::size_t big_flat = 0;
        for (int a = 0; a < g.n; ++a)
            big_flat = big_flat * Nb + static_cast<std::size_t>(idx[a] + shift);
        out.data[big_flat] = f.data[flat];
    });
    return out;
}

ComplexField crop(const ComplexField& f, const GridSpec& target) {
    require_physical(f, "crop");
    const GridSpec& g = f.grid;
    if (target.n != g.n || std::abs(target.spacing() - g.spacing()) > 1e-14 ||
        target.points_per_axis > g.points_per_axis)
        throw ContractViolation("crop: target grid is not a centered sub-grid");
    ComplexField out(target);
    const int shift = (g.points_per_axis - target.points_per_axis) / 2;
    const int Nb = g.points_per_axis;
    for_each_index(target, [&](std::span<const int> idx, std::size_t flat) {
        std::size_t big_flat = 0;
        for (int a = 0; a < g.n; ++a)
            big_flat = big_flat * Nb + static_cast<std::size_t>(idx[a] + shift);
        out.data[flat] = f.data[big_flat];
    });
    return out;
}

ComplexField make_gaussian(const GridSpec& grid, std::span<const double> center,
                           double width) {
    if (static_cast<int>(center.size()) != grid.n)
        throw ContractViolation("make_gaussian: center dimension mismatch");
    ComplexField out(grid);
    for_each_index(grid, [&](std::span<const int> idx, std::size_t flat) {
        double r2 = 0.0;
        for (int a = 0; a < grid.n; ++a) {
            const double d = grid.coordinate(idx[a]) - center[a];
            r2 += d * d;
        }
        out.data[flat] = std::exp(-r2 / (2.0 * width * width));
    });
    return out;
}

ComplexField make_bump(const GridSpec& grid, std::span<const double> center,
                       double radius, cd height) {
    if (static_cast<int>(center.size()) != grid.n)
        throw ContractViolation("make_bump: center dimension mismatch");
    ComplexField out(grid);
    for_each_index(grid, [&](std::span<const int> idx, std::size_t flat) {
        double r2 = 0.0;
        for (int a = 0; a < grid.n; ++a) {
            const double d = grid.coordinate(idx[a]) - center[a];
            r2 += d * d;
        }
        const double s = r2 / (radius * radius);
        out.data[flat] = s < 1.0 ? height * std::exp(1.0 - 1.0 / (1.0 - s)) : cd(0.0);
    });
    return out;
}

ComplexField make_plane_wave(const GridSpec& grid, std::span<const int> mode) {
    if (static_cast<int>(mode.size()) != grid.n)
        throw ContractViolation("make_plane_wave: mode dimension mismatch");
    ComplexField out(grid);
    const double dxi = grid.freq_spacing();
    for_each_index(grid, [&](std::span<const int> idx, std::size_t flat) {
        double phase = 0.0;
        for (int a = 0; a < grid.n; ++a)
            phase += dxi * mode[a] * grid.coordinate(idx[a]);
        out.data[flat] = cd(std::cos(phase), std::sin(phase));
    });
    return out;
}

ComplexField axpby(cd a, const ComplexField& f, cd b, const ComplexField& g) {
    if (!(f.grid == g.grid) || f.rep != g.rep)
        throw ContractViolation("axpby: mismatched fields");
    ComplexField out = f;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = a * f.data[i] + b * g.data[i];
    return out;
}

ComplexField multiply(const ComplexField& f, const ComplexField& g) {
    if (!(f.grid == g.grid) || f.rep != g.rep)
        throw ContractViolation("multiply: mismatched fields");
    ComplexField out = f;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = f.data[i] * g.data[i];
    return out;
}

double rel_l2_error(const ComplexField& a, const ComplexField& b) {
    if (!(a.grid == b.grid))
        throw ContractViolation("rel_l2_error: mismatched grids");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        num += std::norm(a.data[i] - b.data[i]);
        den += std::norm(b.data[i]);
    }
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num / den);
}

} // namespace pgf
