#pragma once

#include "equigrid/specfun.hpp"
#include "equigrid/random.hpp"
#include "equigrid/stochastic.hpp"
#include "equigrid/grids.hpp"
#include "equigrid/gausspath.hpp"
#include "equigrid/replicas.hpp"
#include "equigrid/estimators.hpp"
#include "equigrid/oracle.hpp"
#include "equigrid/analysis.hpp"
#include "equigrid/io.hpp"
#include "equigrid/figures.hpp"
