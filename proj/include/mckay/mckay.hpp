#pragma once

#include "mckay/types.hpp"
#include "mckay/group_rep.hpp"
#include "mckay/quiver.hpp"
#include "mckay/matrix_exp.hpp"
#include "mckay/fixed_points.hpp"
#include "mckay/parallel.hpp"
#include "mckay/flow.hpp"
#include "mckay/holonomy.hpp"
#include "mckay/intertwiner.hpp"
#include "mckay/io.hpp"
