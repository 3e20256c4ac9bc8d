#pragma once

// Umbrella header.

#include "untangle/bvh.hpp"
#include "untangle/dcd.hpp"
#include "untangle/diffusion.hpp"
#include "untangle/intersect.hpp"
#include "untangle/mesh.hpp"
#include "untangle/obj_io.hpp"
#include "untangle/response.hpp"
#include "untangle/scenarios.hpp"
#include "untangle/shapes.hpp"
#include "untangle/sim.hpp"
#include "untangle/stencil.hpp"
#include "untangle/untangler.hpp"
