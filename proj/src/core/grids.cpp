#include "emma/core/grids.hpp"

namespace emma {

DepthGrid DepthGrid::scaled(double factor) const {
  DepthGrid out = *this;
  for (double& v : out.values) v *= factor;
  return out;
}

}  // namespace emma
