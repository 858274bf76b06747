#pragma once

#include "ssiter/errors.hpp"
#include "ssiter/linalg.hpp"
#include "ssiter/random.hpp"
#include "ssiter/topology.hpp"
#include "ssiter/inputs.hpp"
#include "ssiter/sync_engine.hpp"
#include "ssiter/async_engine.hpp"
#include "ssiter/analysis.hpp"
#include "ssiter/experiment.hpp"
