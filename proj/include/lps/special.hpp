#pragma once

namespace lps::special {

// Exponentially scaled modified Bessel function e^{-z} I_nu(z), z >= 0.
double bessel_ie(double nu, double z);

// I_nu(z) restricted to |nu| <= 20, 0 <= z <= 50; OutOfValidatedRange outside.
double bessel_i(double nu, double z);

}  // namespace lps::special
