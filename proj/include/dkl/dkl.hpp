#pragma once

#include "dkl/cache.hpp"
#include "dkl/config.hpp"
#include "dkl/delta.hpp"
#include "dkl/diophantine.hpp"
#include "dkl/divisor_table.hpp"
#include "dkl/double_double.hpp"
#include "dkl/errors.hpp"
#include "dkl/experiments.hpp"
#include "dkl/fit.hpp"
#include "dkl/main_term.hpp"
#include "dkl/moments.hpp"
#include "dkl/omega.hpp"
#include "dkl/quadrature.hpp"
#include "dkl/rng.hpp"
#include "dkl/summation.hpp"
#include "dkl/version.hpp"
#include "dkl/voronoi.hpp"
