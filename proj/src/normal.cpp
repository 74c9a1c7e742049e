#include "lsmc/normal.hpp"

#include <boost/math/distributions/normal.hpp>

namespace lsmc::normal {

double quantile(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double upper_quantile(double q) {
    return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(), q));
}

} // namespace lsmc::normal
