#pragma once

#include "dcl/analysis.hpp"
#include "dcl/error.hpp"
#include "dcl/experiment.hpp"
#include "dcl/figures.hpp"
#include "dcl/geometry.hpp"
#include "dcl/measurement.hpp"
#include "dcl/metrics.hpp"
#include "dcl/protocol.hpp"
#include "dcl/results_io.hpp"
#include "dcl/scenario.hpp"
#include "dcl/sensing_graph.hpp"
