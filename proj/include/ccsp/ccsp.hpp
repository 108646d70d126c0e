#pragma once

#include "ccsp/apps.hpp"
#include "ccsp/clique.hpp"
#include "ccsp/dist_tools.hpp"
#include "ccsp/errors.hpp"
#include "ccsp/experiment.hpp"
#include "ccsp/generate.hpp"
#include "ccsp/graph.hpp"
#include "ccsp/hopset.hpp"
#include "ccsp/io.hpp"
#include "ccsp/matmul.hpp"
#include "ccsp/near.hpp"
#include "ccsp/oracle.hpp"
#include "ccsp/partition.hpp"
#include "ccsp/semiring.hpp"
#include "ccsp/sparse_matrix.hpp"
