#pragma once

#include "packlab/constructions.hpp"
#include "packlab/diffusion.hpp"
#include "packlab/error.hpp"
#include "packlab/geometry.hpp"
#include "packlab/packing.hpp"
#include "packlab/recurrence.hpp"
#include "packlab/saturation.hpp"
#include "packlab/svg.hpp"
#include "packlab/voronoi.hpp"
