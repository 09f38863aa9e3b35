#pragma once

// Umbrella header.
#include "dpost/config.hpp"
#include "dpost/disparity.hpp"
#include "dpost/error.hpp"
#include "dpost/hierarchical.hpp"
#include "dpost/inference.hpp"
#include "dpost/io.hpp"
#include "dpost/kde.hpp"
#include "dpost/models.hpp"
#include "dpost/optimize.hpp"
#include "dpost/parallel.hpp"
#include "dpost/posterior.hpp"
#include "dpost/quadrature.hpp"
#include "dpost/regression.hpp"
#include "dpost/rng.hpp"
#include "dpost/sampler.hpp"
#include "dpost/simharness.hpp"
#include "dpost/stats.hpp"
