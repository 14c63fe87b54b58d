#pragma once

// Umbrella header for the full library.

#include "icgtm/blocks.hpp"
#include "icgtm/cluster.hpp"
#include "icgtm/games.hpp"
#include "icgtm/homography.hpp"
#include "icgtm/io.hpp"
#include "icgtm/metrics.hpp"
#include "icgtm/parallel.hpp"
#include "icgtm/payoff.hpp"
#include "icgtm/pipeline.hpp"
#include "icgtm/svg.hpp"
#include "icgtm/synth.hpp"
#include "icgtm/types.hpp"
