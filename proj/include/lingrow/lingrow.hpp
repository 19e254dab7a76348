#pragma once

#include "lingrow/config.hpp"
#include "lingrow/density2d.hpp"
#include "lingrow/derivatives.hpp"
#include "lingrow/ellipticity.hpp"
#include "lingrow/experiments.hpp"
#include "lingrow/exponents.hpp"
#include "lingrow/expression.hpp"
#include "lingrow/grid.hpp"
#include "lingrow/growth.hpp"
#include "lingrow/level_curve.hpp"
#include "lingrow/regularize.hpp"
#include "lingrow/runner.hpp"
#include "lingrow/scalar_density.hpp"
#include "lingrow/solver.hpp"
#include "lingrow/version.hpp"
