#pragma once

// Everything at once, for tools and quick experiments.

#include "sst/core.hpp"
#include "sst/cost_model.hpp"
#include "sst/exact.hpp"
#include "sst/generators.hpp"
#include "sst/greedy.hpp"
#include "sst/hardness.hpp"
#include "sst/io.hpp"
#include "sst/machine_cost.hpp"
#include "sst/mssc.hpp"
#include "sst/oracles.hpp"
#include "sst/quota.hpp"
#include "sst/routing_cost.hpp"
#include "sst/tree_cost.hpp"
