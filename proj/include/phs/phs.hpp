#pragma once

// Staggered-grid finite-difference discretization of linear 1D/2D
// port-Hamiltonian distributed-parameter systems: umbrella header.

#include "phs/assemble1d.hpp"
#include "phs/assemble2d.hpp"
#include "phs/core.hpp"
#include "phs/error.hpp"
#include "phs/grid1d.hpp"
#include "phs/grid2d.hpp"
#include "phs/interconnect.hpp"
#include "phs/models.hpp"
#include "phs/signal.hpp"
#include "phs/simulate.hpp"
#include "phs/system.hpp"
