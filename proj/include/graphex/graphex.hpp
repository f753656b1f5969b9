#pragma once

// Umbrella header: simulation and statistics for sparse exchangeable random
// graphs driven by regularly varying kernels.

#include "graphex/cdegree.hpp"
#include "graphex/errors.hpp"
#include "graphex/experiment.hpp"
#include "graphex/graph.hpp"
#include "graphex/graphex_spec.hpp"
#include "graphex/io.hpp"
#include "graphex/limits.hpp"
#include "graphex/marginals.hpp"
#include "graphex/point_process.hpp"
#include "graphex/poisson_check.hpp"
#include "graphex/quadrature.hpp"
#include "graphex/rng.hpp"
#include "graphex/samplers.hpp"
#include "graphex/stats.hpp"
#include "graphex/theory.hpp"

namespace graphex {
inline constexpr const char* kVersion = "0.1.0";
}
