#pragma once

// Distribution functions used by the samplers and interval code. These are
// thin wrappers over Boost.Math so the rest of the library does not depend
// on its policy machinery directly.

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "xmes/error.hpp"

namespace xmes::special {

using Policy = boost::math::policies::policy<
    boost::math::policies::overflow_error<boost::math::policies::errno_on_error>,
    boost::math::policies::evaluation_error<boost::math::policies::errno_on_error>,
    boost::math::policies::promote_double<false>>;

inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidInput, "probability outside (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double, Policy>(), p);
}

inline double student_t_cdf(double dof, double x) {
  return boost::math::cdf(boost::math::students_t_distribution<double, Policy>(dof), x);
}

/// P(T > x), accurate far in the upper tail.
inline double student_t_survival(double dof, double x) {
  return boost::math::cdf(
      boost::math::complement(boost::math::students_t_distribution<double, Policy>(dof), x));
}

inline double student_t_quantile(double dof, double p) {
  return boost::math::quantile(boost::math::students_t_distribution<double, Policy>(dof), p);
}

/// x with P(T > x) = p.
inline double student_t_upper_quantile(double dof, double p) {
  return boost::math::quantile(
      boost::math::complement(boost::math::students_t_distribution<double, Policy>(dof), p));
}

}  // namespace xmes::special
