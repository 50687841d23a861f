#pragma once

// Umbrella header: the whole library.

#include "ovnet/cli.hpp"
#include "ovnet/datasets.hpp"
#include "ovnet/geometry.hpp"
#include "ovnet/metrics.hpp"
#include "ovnet/network.hpp"
#include "ovnet/orientation.hpp"
#include "ovnet/planner.hpp"
#include "ovnet/random.hpp"
#include "ovnet/serialization.hpp"
#include "ovnet/synthesis.hpp"
#include "ovnet/trainer.hpp"
