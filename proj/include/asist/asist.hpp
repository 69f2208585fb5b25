#pragma once

// Umbrella header for the full scene-transformation toolkit.

#include "asist/artifacts.hpp"
#include "asist/benchmark.hpp"
#include "asist/boxes.hpp"
#include "asist/cell.hpp"
#include "asist/common.hpp"
#include "asist/config.hpp"
#include "asist/energy.hpp"
#include "asist/evaluate.hpp"
#include "asist/exemplar.hpp"
#include "asist/forest.hpp"
#include "asist/graph.hpp"
#include "asist/icp.hpp"
#include "asist/kdtree.hpp"
#include "asist/kmedoids.hpp"
#include "asist/mean_shift.hpp"
#include "asist/mesh.hpp"
#include "asist/pipeline.hpp"
#include "asist/ply_io.hpp"
#include "asist/point_cloud.hpp"
#include "asist/pose_init.hpp"
#include "asist/procgen.hpp"
#include "asist/report.hpp"
#include "asist/rigid.hpp"
#include "asist/segmentation.hpp"
#include "asist/split.hpp"
#include "asist/spectral.hpp"
#include "asist/voting.hpp"
#include "asist/voxel_grid.hpp"
