#pragma once

namespace pinlab {

/// Exponentially scaled modified Bessel function of the first kind,
/// e^{-x} I_n(x), for integer order n and x >= 0.
///
/// Power series for x <= 20. Above that, I_0 comes from the scaled Hankel
/// asymptotic series and higher orders from the continued fraction for
/// I_n / I_{n-1} with stable backward ratio recursion.
double bessel_i_scaled(int order, double x);

inline constexpr double kBesselSeriesSwitch = 20.0;

}  // namespace pinlab
