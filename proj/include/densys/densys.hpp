#pragma once

#include "densys/signal.hpp"
#include "densys/density.hpp"
#include "densys/trajectory.hpp"
#include "densys/system.hpp"
#include "densys/integrate.hpp"
#include "densys/constraint.hpp"
#include "densys/polynomial.hpp"
#include "densys/plant.hpp"
#include "densys/adaptive.hpp"
#include "densys/config.hpp"
#include "densys/registry.hpp"
#include "densys/runner.hpp"
