#pragma once

#include "netfx/core/design.hpp"
#include "netfx/core/error.hpp"
#include "netfx/core/io.hpp"
#include "netfx/core/matrix.hpp"
#include "netfx/core/parallel.hpp"
#include "netfx/core/random.hpp"
#include "netfx/core/summary.hpp"
#include "netfx/core/twins.hpp"
#include "netfx/core/types.hpp"
#include "netfx/core/validate.hpp"
#include "netfx/dgp/gaussian.hpp"
#include "netfx/estimation/estimation.hpp"
#include "netfx/harness/config.hpp"
#include "netfx/harness/report.hpp"
#include "netfx/harness/runner.hpp"
#include "netfx/inference/resample.hpp"
#include "netfx/scenarios/binary_mrt.hpp"
#include "netfx/scenarios/graph.hpp"
#include "netfx/scenarios/jsq_queue.hpp"
#include "netfx/scenarios/linear_in_means.hpp"
#include "netfx/state_evolution/quadrature.hpp"
#include "netfx/state_evolution/state_evolution.hpp"
