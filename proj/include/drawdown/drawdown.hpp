// Umbrella header.
#pragma once

#include "drawdown/errors.hpp"
#include "drawdown/xreal.hpp"
#include "drawdown/numerics.hpp"
#include "drawdown/model.hpp"
#include "drawdown/closed_forms.hpp"
#include "drawdown/boundary.hpp"
#include "drawdown/curve_solver.hpp"
#include "drawdown/value_surface.hpp"
#include "drawdown/verifier.hpp"
#include "drawdown/simulator.hpp"
#include "drawdown/deterministic.hpp"
