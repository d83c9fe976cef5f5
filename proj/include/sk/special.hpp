#pragma once

namespace sk::special {

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Two-sided p-value P(|T| >= |t|) for Student's t with `df` degrees of
// freedom (df may be fractional, as in Welch's test).
double student_t_two_sided(double t, double df);

}  // namespace sk::special
