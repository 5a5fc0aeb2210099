#pragma once

namespace entrochart::special {

/// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);

/// Regularized upper incomplete gamma Q(a, x): series for x < a + 1, continued fraction otherwise.
double incomplete_gamma_upper(double a, double x);

/// Two-sided tail P(|T| >= |t|) of Student's t with `df` degrees of freedom.
double student_t_two_sided(double t, double df);

/// P(X >= x) for chi-squared with k degrees of freedom.
double chi2_sf(double x, double k);

/// Two-sided normal tail P(|Z| >= |z|).
double normal_two_sided(double z);

}  // namespace entrochart::special
