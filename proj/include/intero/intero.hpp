#pragma once

#include "intero/ablate.hpp"
#include "intero/allostat.hpp"
#include "intero/arbiter.hpp"
#include "intero/config.hpp"
#include "intero/core_state.hpp"
#include "intero/enact.hpp"
#include "intero/envs.hpp"
#include "intero/envs/costly_maze.hpp"
#include "intero/envs/drift_bandit.hpp"
#include "intero/envs/viability_grid.hpp"
#include "intero/errors.hpp"
#include "intero/harness.hpp"
#include "intero/homeostat.hpp"
#include "intero/learner.hpp"
#include "intero/metrics.hpp"
#include "intero/record.hpp"
#include "intero/report.hpp"
#include "intero/rng.hpp"
#include "intero/world_model.hpp"
