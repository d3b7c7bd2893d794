#pragma once

#include "surftopo/heightfield.hpp"

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace surftopo {

// A parameter value that may be undefined for a given field. `reason` is a
// short token such as "constant_field"; `bound` carries extra information
// (for Sal: the largest lag searched, mm).
struct ParamValue {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool defined = false;
  std::string reason;
  double bound = std::numeric_limits<double>::quiet_NaN();

  static ParamValue of(double v) { return {v, true, {}, std::numeric_limits<double>::quiet_NaN()}; }
  static ParamValue undefined(std::string why,
                              double bound = std::numeric_limits<double>::quiet_NaN()) {
    return {std::numeric_limits<double>::quiet_NaN(), false, std::move(why), bound};
  }
  // Number, or `undef(<reason>)`.
  std::string str(int precision = 6) const;
};

// Subtracts the least-squares plane over valid cells. Throws DomainError
// with fewer than 3 valid cells or a rank-deficient fit.
HeightField level(const HeightField& hf);

struct AmplitudeParams {
  double Sa = 0.0;  // um
  double Sq = 0.0;  // um
  double Sz = 0.0;  // um
  double Sv = 0.0;  // um, deepest pit
  ParamValue Ssk;
  ParamValue Sku;
};

// Moments over valid cells of a levelled field.
AmplitudeParams amplitude_params(const HeightField& hf);

// Strict 8-neighbour maxima among interior cells (all neighbours valid) per
// mm^2 of valid area.
double summit_density(const HeightField& hf);

// Normalised areal autocorrelation (biased estimator) of the mean-removed
// field, lags -(n-1)..(n-1) per axis, laid out as (2nx-1) x (2ny-1) with the
// zero lag at the centre. FFT with 2x zero padding.
struct Autocorrelation {
  std::size_t nx = 0;  // field size the ACF was computed from
  std::size_t ny = 0;
  double dx = 1.0;
  double dy = 1.0;
  std::vector<double> values;
  double at(std::ptrdiff_t lx, std::ptrdiff_t ly) const {
    const auto w = static_cast<std::ptrdiff_t>(2 * nx - 1);
    return values[static_cast<std::size_t>((ly + static_cast<std::ptrdiff_t>(ny) - 1) * w +
                                           lx + static_cast<std::ptrdiff_t>(nx) - 1)];
  }
};
Autocorrelation autocorrelation_fft(const HeightField& hf);
// O(n^4) reference used to check the FFT path.
Autocorrelation autocorrelation_direct(const HeightField& hf);

// Sal: smallest lag (mm), minimised over directions, at which the ACF falls
// to `threshold`. Undefined for constant fields or when no direction decays
// within half the field extent.
ParamValue autocorrelation_length(const HeightField& hf, double threshold = 0.2);

// Std: lay direction in degrees, (-90, 90], x axis towards y, from the
// angular power spectrum (1 degree bins, sub-bin refined). Undefined for
// constant fields and when the power-weighted doubled-angle resultant is
// below kStdIsotropyThreshold.
ParamValue texture_direction(const HeightField& hf);
inline constexpr double kStdBinDegrees = 1.0;
inline constexpr double kStdRefineDegrees = 5.0;
inline constexpr double kStdIsotropyThreshold = 0.05;

// Largest axis-aligned rectangle of valid cells; the FFT-based parameters
// run on this crop when the field has masked cells.
HeightField largest_valid_rectangle(const HeightField& hf);

struct ArealParams {
  ParamValue Sz, Sa, Sq, Sku, Ssk, Sv, Sds, Sal, Std;
};

// Levels the field (unless already_levelled) and evaluates every parameter;
// failures become undefined entries rather than exceptions.
ArealParams compute_all(const HeightField& hf, double sal_threshold = 0.2,
                        bool already_levelled = false);

// Column order of the CSV report.
const std::vector<std::string>& areal_param_names();
std::vector<ParamValue> areal_param_values(const ArealParams& p);
void write_areal_report(const ArealParams& p, std::ostream& out);
void write_areal_csv(const std::vector<ArealParams>& rows, std::ostream& out);

}  // namespace surftopo
