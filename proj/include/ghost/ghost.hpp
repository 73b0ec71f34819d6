#pragma once

#include "ghost/camera.hpp"
#include "ghost/colmap_model.hpp"
#include "ghost/config.hpp"
#include "ghost/error.hpp"
#include "ghost/evaluation.hpp"
#include "ghost/geometry.hpp"
#include "ghost/grid.hpp"
#include "ghost/ground_plane.hpp"
#include "ghost/image_io.hpp"
#include "ghost/lane_graph.hpp"
#include "ghost/objective.hpp"
#include "ghost/parallel.hpp"
#include "ghost/raster.hpp"
#include "ghost/synthetic.hpp"
#include "ghost/theil_sen.hpp"
#include "ghost/trajectory_mask.hpp"
