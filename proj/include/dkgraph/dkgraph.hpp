#pragma once

#include "dkgraph/continuum.hpp"
#include "dkgraph/cycle_breaking.hpp"
#include "dkgraph/discrete_trees.hpp"
#include "dkgraph/edgepoints.hpp"
#include "dkgraph/error.hpp"
#include "dkgraph/experiments.hpp"
#include "dkgraph/graph_samplers.hpp"
#include "dkgraph/io.hpp"
#include "dkgraph/labeled_tree.hpp"
#include "dkgraph/metric_tree.hpp"
#include "dkgraph/multigraph.hpp"
#include "dkgraph/params.hpp"
#include "dkgraph/reconstruct.hpp"
#include "dkgraph/rng.hpp"
#include "dkgraph/statistics.hpp"
#include "dkgraph/vertex.hpp"
