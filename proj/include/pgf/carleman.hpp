#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pgf/field.hpp"

namespace pgf {

/// Exponent bookkeeping for the L^p Carleman estimates: p = 2n/(n+2m),
/// q = 2n/(n-2m) with 1 <= m < n/2. The conjugacy identity
/// 1/p - 1/q = 2m/n holds exactly in integer arithmetic.
struct CarlemanConfig {
    int m = 1;
    int n = 3;

    CarlemanConfig(int m_, int n_);

    double p() const;
    double q() const;
    /// 1/p - 1/q = 2m/n checked with integers (no rounding).
    bool exponent_identity_exact() const;
    /// dist(t - n/q, Z); n/q = (n-2m)/2 exactly.
    double delta(double t) const;
};

/// A compactly supported test sample: u vanishes outside |x| <= support_outer
/// and (for annular samples) inside |x| <= support_inner. The radii let the
/// probes truncate the spectrally computed (-Delta)^m u back to the support
/// of u, where it lives analytically (the operator is local); this removes
/// periodic-ringing artifacts that the exponential weights would otherwise
/// amplify by factors up to e^{|k| L}.
struct CarlemanSample {
    ComplexField u;
    double support_inner = 0.0;
    double support_outer = 0.0;
    std::string id;
    /// Center of the supporting ball/annulus; empty means the origin.
    std::vector<double> support_center;
};

struct ProbeRow {
    std::string weight_type;  // "linear" or "log"
    double parameter = 0.0;   // |k| or t
    std::string sample_id;
    double ratio = 0.0;
    bool skipped = false;
};

struct CarlemanReport {
    std::vector<ProbeRow> rows;
    double empirical_constant = 0.0;  // max ratio over non-skipped rows
    int skipped = 0;
    double delta = 0.0;        // log probe only
    bool delta_flagged = false;  // delta < 1e-3
};

/// Linear-weight probe: max over samples and k of
/// ||e^{k.x} u||_q / ||e^{k.x} (-Delta)^m u||_p. The operator is applied
/// spectrally on a factor-2 enlarged box; weighted norms are evaluated in
/// log space with max-subtraction so |k.x| ~ 10^3 cannot overflow.
/// Degenerate samples (vanishing u) are recorded as skipped rows.
CarlemanReport probe_linear(const CarlemanConfig& cfg,
                            std::span<const CarlemanSample> test_set,
                            const std::vector<std::vector<double>>& k_list);

/// Log-weight probe: max over samples of
/// || |x|^{-t} u ||_q / || |x|^{-t} (-Delta)^m u ||_p for u vanishing on a
/// ball around the origin (radius >= 4 grid cells; violated -> error).
/// delta = dist(t - n/q, Z) is reported and flagged below 1e-3.
CarlemanReport probe_log(const CarlemanConfig& cfg,
                         std::span<const CarlemanSample> test_set, double t);

/// Radial C-infinity bump supported on the annulus r0-w <= |x| <= r0+w.
ComplexField make_annular_bump(const GridSpec& grid, double r0, double w);

/// CSV with columns weight-type, parameter, sample-id, ratio.
void write_probe_csv(std::ostream& os, const CarlemanReport& report);

} // namespace pgf
