#pragma once

#include "simlab/barrier.hpp"
#include "simlab/config_io.hpp"
#include "simlab/controller.hpp"
#include "simlab/dnn.hpp"
#include "simlab/errors.hpp"
#include "simlab/expr.hpp"
#include "simlab/graph.hpp"
#include "simlab/integrator.hpp"
#include "simlab/linalg.hpp"
#include "simlab/output.hpp"
#include "simlab/plant.hpp"
#include "simlab/random.hpp"
#include "simlab/scenario.hpp"
#include "simlab/sim.hpp"
#include "simlab/sliding.hpp"
#include "simlab/sweep.hpp"
