#pragma once

// Umbrella header for the entanglement-switch capacity toolkit.

#include "entswitch/analytic.hpp"
#include "entswitch/ctmc.hpp"
#include "entswitch/manifest.hpp"
#include "entswitch/model.hpp"
#include "entswitch/region.hpp"
#include "entswitch/sim.hpp"
#include "entswitch/version.hpp"
