#pragma once

#include "plapvar/conditions.hpp"
#include "plapvar/config.hpp"
#include "plapvar/eigen.hpp"
#include "plapvar/error.hpp"
#include "plapvar/expr.hpp"
#include "plapvar/extended_real.hpp"
#include "plapvar/fem.hpp"
#include "plapvar/field.hpp"
#include "plapvar/limsup.hpp"
#include "plapvar/mesh.hpp"
#include "plapvar/nonlinearity.hpp"
#include "plapvar/parallel.hpp"
#include "plapvar/run.hpp"
#include "plapvar/solver.hpp"
#include "plapvar/weights.hpp"
