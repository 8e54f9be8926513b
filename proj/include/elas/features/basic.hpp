#ifndef ELAS_FEATURES_BASIC_HPP
#define ELAS_FEATURES_BASIC_HPP

#include "elas/features/common.hpp"

namespace elas::features {

inline Feature dim_feature(Eigen::Index d) { return {"basic.dim", static_cast<double>(d)}; }

inline Feature obs_feature(const SampleSet& s) { return {"basic.obs", static_cast<double>(s.size())}; }

}  // namespace elas::features

#endif  // ELAS_FEATURES_BASIC_HPP
