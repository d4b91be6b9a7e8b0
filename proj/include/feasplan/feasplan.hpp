#pragma once

#include "feasplan/core.hpp"
#include "feasplan/curves.hpp"
#include "feasplan/gridmap.hpp"
#include "feasplan/heuristics.hpp"
#include "feasplan/lattice.hpp"
#include "feasplan/planners.hpp"
#include "feasplan/search.hpp"
#include "feasplan/smoother.hpp"
#include "feasplan/trajectory.hpp"
